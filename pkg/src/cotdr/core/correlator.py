"""Correlation of received frames with the probe, and trace read-outs."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import replace

import numpy as np
from scipy import ndimage, signal
from scipy.constants import c as SPEED_OF_LIGHT

from cotdr.core.probegen import modulate, probe_bits
from cotdr.models.enums import DetectionMode, FitMethod, Modulation
from cotdr.models.signals import (
    CorrTrace,
    DelayEstimate,
    FloatArray,
    Fingerprint,
    Peak,
    RxFrame,
    Waveform,
)
from cotdr.models.specs import ProbeSpec

logger = logging.getLogger(__name__)


def reference_waveform(spec: ProbeSpec, mode: DetectionMode) -> Waveform:
    """Correlation reference for a detection mode.

    Direct detection correlates the photocurrent with the unipolar intensity
    sequence minus its mean; coherent detection uses the bipolar field.
    """
    bits = probe_bits(spec)
    if mode is DetectionMode.DIRECT:
        unipolar = modulate(bits, _with_modulation(spec, Modulation.OOK))
        return Waveform(unipolar.samples - unipolar.samples.mean(), unipolar.sample_rate)
    return modulate(bits, _with_modulation(spec, Modulation.BPSK))


def _with_modulation(spec: ProbeSpec, modulation: Modulation) -> ProbeSpec:
    return spec if spec.modulation is modulation else replace(spec, modulation=modulation)


def correlate(frame: RxFrame, reference: Waveform, circular: bool = False) -> CorrTrace:
    """Cross-correlate ``frame`` with ``reference``; bin k is round-trip delay k samples.

    Linear correlation keeps only non-negative lags, so the trace has the
    frame's length. ``circular`` correlates periodically over the frame length.
    """
    if not math.isclose(frame.sample_rate, reference.sample_rate, rel_tol=1e-9):
        raise ValueError("reference and frame sample rates differ")
    x = np.asarray(frame.samples)
    ref = reference.samples
    if ref.shape[0] > x.shape[0]:
        raise ValueError(
            f"reference length {ref.shape[0]} exceeds frame length {x.shape[0]}"
        )

    if circular:
        padded = np.zeros(x.shape[0])
        padded[: ref.shape[0]] = ref
        values = np.fft.ifft(np.fft.fft(x) * np.conj(np.fft.fft(padded)))
    else:
        full = signal.correlate(x, ref, mode="full", method="fft")
        values = full[ref.shape[0] - 1 :]

    return CorrTrace(
        values=np.asarray(values, dtype=np.complex128),
        sample_period=1.0 / frame.sample_rate,
        epoch=frame.epoch,
    )


def average(traces: Sequence[CorrTrace], power: bool = False) -> CorrTrace:
    """Element-wise mean of ``traces``.

    With ``power`` the mean is taken over |values|**2 and the result holds
    its square root (phase is discarded); use it for frames that do not share
    the local oscillator phase epoch.
    """
    if not traces:
        raise ValueError("no traces to average")
    first = traces[0]
    for t in traces[1:]:
        if len(t) != len(first):
            raise ValueError(f"trace lengths differ: {len(first)} vs {len(t)}")
        if not math.isclose(t.sample_period, first.sample_period, rel_tol=1e-12):
            raise ValueError("trace sample periods differ")

    stack = np.stack([t.values for t in traces])
    if power:
        values = np.sqrt(np.mean(np.abs(stack) ** 2, axis=0)).astype(np.complex128)
    else:
        values = stack.mean(axis=0)
    return CorrTrace(
        values=values,
        sample_period=first.sample_period,
        epoch=first.epoch,
        num_averaged=sum(t.num_averaged for t in traces),
    )


def fingerprint(trace: CorrTrace, group_index: float) -> Fingerprint:
    """Power versus one-way distance z = c*tau/(2*n_g)."""
    delay = trace.sample_period * np.arange(len(trace))
    return Fingerprint(
        power=np.abs(trace.values) ** 2,
        distance=SPEED_OF_LIGHT * delay / (2.0 * group_index),
        delay=delay,
    )


def local_floor(power: FloatArray, window: int) -> FloatArray:
    """Sliding-median noise floor."""
    if window < 1:
        raise ValueError(f"median window must be >= 1, got {window}")
    return ndimage.median_filter(power, size=window, mode="nearest")


def find_peaks(
    trace: CorrTrace,
    threshold_db: float,
    window: int = 501,
    group_index: float | None = None,
    fit: FitMethod = FitMethod.PARABOLA,
    max_bin: int | None = None,
) -> list[Peak]:
    """Local maxima of |values|**2 exceeding the sliding median by ``threshold_db``.

    Bins at or past ``max_bin`` are never reported; pass the end of the echo
    window to drop partial-overlap sidelobes of a linear correlation.
    """
    if threshold_db <= 0:
        raise ValueError(f"threshold_db must be > 0, got {threshold_db}")
    power = np.abs(trace.values) ** 2
    floor = local_floor(power, window)
    height = floor * 10.0 ** (threshold_db / 10.0)
    if max_bin is not None:
        height[max(max_bin, 0) :] = np.inf

    # Pad so that bins 0 and n-1 can be reported as maxima.
    padded = np.concatenate(([0.0], power, [0.0]))
    bins, _ = signal.find_peaks(padded, height=np.concatenate(([np.inf], height, [np.inf])))
    bins = bins - 1

    peaks = []
    for b in bins:
        b = int(b)
        if power[b] <= 0.0:
            continue
        estimate = subsample_fit(trace, b, fit)
        distance = (
            SPEED_OF_LIGHT * estimate.delay / (2.0 * group_index) if group_index else 0.0
        )
        peaks.append(
            Peak(
                bin=b,
                refined_delay=estimate.delay,
                magnitude=float(np.abs(trace.values[b])),
                phase=phase_at(trace, b),
                distance=distance,
            )
        )
    return peaks


def subsample_fit(
    trace: CorrTrace, bin: int, method: FitMethod = FitMethod.PARABOLA
) -> DelayEstimate:
    """Refine the delay of the peak at ``bin`` from its two neighbours.

    The parabola puts a vertex through |v| at bins -1, 0, +1. The triangle
    fit assumes equal slopes on both sides of the peak, which is the shape a
    rectangular chip's correlation takes.
    """
    n = len(trace)
    if not 0 <= bin < n:
        raise ValueError(f"bin {bin} outside the trace [0, {n})")
    if bin == 0 or bin == n - 1:
        logger.warning("Peak at trace edge bin %d; using the raw bin", bin)
        return DelayEstimate(delay=bin * trace.sample_period, fallback=True)

    y_m, y_0, y_p = np.abs(trace.values[bin - 1 : bin + 2])
    if method is FitMethod.TRIANGLE:
        denom = 2.0 * (y_0 - min(y_m, y_p))
        offset = (y_p - y_m) / denom if denom > 0 else 0.0
    else:
        denom = y_m - 2.0 * y_0 + y_p
        offset = 0.5 * (y_m - y_p) / denom if denom < 0 else 0.0
    offset = float(np.clip(offset, -1.0, 1.0))
    return DelayEstimate(delay=(bin + offset) * trace.sample_period)


def phase_at(trace: CorrTrace, bin: int) -> float:
    """Argument of ``values[bin]`` in (-pi, pi]."""
    value = trace.values[bin]
    if value == 0:
        raise ValueError(f"undefined phase at bin {bin}")
    phase = float(np.angle(value))
    return np.pi if phase == -np.pi else phase


def diff_phase(trace: CorrTrace, bin_a: int, bin_b: int) -> float:
    """Phase of ``bin_b`` relative to ``bin_a``, wrapped to (-pi, pi]."""
    a = trace.values[bin_a]
    b = trace.values[bin_b]
    if a == 0 or b == 0:
        raise ValueError(f"undefined phase at bin {bin_a if a == 0 else bin_b}")
    phase = float(np.angle(b * np.conj(a)))
    return np.pi if phase == -np.pi else phase
