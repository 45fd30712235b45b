"""Frame synthesis: fiber response -> detection -> ADC -> correlation.

Every frame draws its randomness from ``SeedSequence([seed, frame, shot])``,
so traces depend only on the scenario and never on worker scheduling.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from cotdr.core.correlator import average, correlate, reference_waveform
from cotdr.core.fibermodel import apply_perturbations, build_static_response
from cotdr.core.frontend import adc, detect_coherent, detect_direct, propagate
from cotdr.core.probegen import probe_waveform
from cotdr.models.enums import DetectionMode
from cotdr.models.signals import (
    ComplexArray,
    CorrTrace,
    FloatArray,
    ImpulseResponse,
    RxFrame,
    Waveform,
)
from cotdr.models.specs import DetectionConfig, Scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Interrogator:
    """What stays fixed across frames: probe, reference, frame size and receiver."""

    probe: Waveform
    reference: Waveform
    frame_length: int
    detection: DetectionConfig

    @property
    def sample_period(self) -> float:
        return 1.0 / self.probe.sample_rate


def frame_seed(seed: int, frame: int, shot: int) -> np.random.SeedSequence:
    """Seed of one acquisition (``shot``) of one frame."""
    return np.random.SeedSequence([seed, frame, shot])


def detect(
    field: ComplexArray, cfg: DetectionConfig, seed: np.random.SeedSequence, sample_period: float
) -> FloatArray | ComplexArray:
    if cfg.mode is DetectionMode.DIRECT:
        return detect_direct(field, cfg, seed)
    return detect_coherent(field, cfg, seed, sample_period)


def acquire(
    response: ImpulseResponse, rig: Interrogator, seed: int, frame: int
) -> CorrTrace:
    """Correlation trace of one frame, averaged over ``num_averages`` acquisitions.

    Phase-locked acquisitions are averaged before correlating (correlation
    is linear); otherwise each is correlated and the powers are averaged.
    """
    cfg = rig.detection
    field = propagate(rig.probe, response, rig.frame_length)
    count = cfg.num_averages

    def shot(j: int) -> FloatArray | ComplexArray:
        return adc(detect(field, cfg, frame_seed(seed, frame, j), rig.sample_period), cfg)

    def as_frame(samples: FloatArray | ComplexArray) -> RxFrame:
        return RxFrame(
            samples=samples,
            sample_rate=rig.probe.sample_rate,
            epoch=response.epoch,
            detection=cfg.mode,
        )

    if cfg.phase_locked or count == 1:
        total = shot(0)
        for j in range(1, count):
            total = total + shot(j)
        trace = correlate(as_frame(total / count), rig.reference)
        if count == 1:
            return trace
        return CorrTrace(
            values=trace.values,
            sample_period=trace.sample_period,
            epoch=trace.epoch,
            num_averaged=count,
        )
    traces = [correlate(as_frame(shot(j)), rig.reference) for j in range(count)]
    return average(traces, power=True)


def interrogator(scenario: Scenario) -> Interrogator:
    probe = scenario.probe
    return Interrogator(
        probe=probe_waveform(probe),
        reference=reference_waveform(probe, scenario.detection.mode),
        frame_length=probe.frame_length,
        detection=scenario.detection,
    )


def synthesize(scenario: Scenario, workers: int = 4) -> list[CorrTrace]:
    """Correlation traces of every frame of ``scenario``, in frame order."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    probe = scenario.probe
    rig = interrogator(scenario)
    base = build_static_response(scenario.fiber, probe.sample_rate, probe.wavelength)

    def one(frame: int) -> CorrTrace:
        epoch = frame / scenario.frame_rate
        response = apply_perturbations(
            base, scenario.fiber, scenario.perturbations, epoch, probe.wavelength
        )
        return acquire(response, rig, scenario.seed, frame)

    logger.info(
        "Synthesizing %d frames of %d samples with %d workers",
        scenario.frames,
        rig.frame_length,
        workers,
    )
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(scenario.frames)))
