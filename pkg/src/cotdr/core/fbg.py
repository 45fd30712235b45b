"""Wavelength-swept interrogation of a fiber Bragg grating chain.

Each grating is a reflector whose power reflectivity follows a Gaussian in
probe wavelength. At every sweep step the coherent chain is run once and the
grating's correlation bin is read; reflections overlapping within one
sequence duration add linearly and are separated by their delays.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from cotdr.core.analysis import bin_of_position
from cotdr.core.correlator import find_peaks, reference_waveform
from cotdr.core.fibermodel import build_static_response
from cotdr.core.pipeline import Interrogator, acquire
from cotdr.core.probegen import probe_waveform
from cotdr.models.enums import DetectionMode
from cotdr.models.signals import FbgSweepResult, FloatArray
from cotdr.models.specs import DetectionConfig, FbgScenario, FiberSpec, ProbeSpec, Reflector

logger = logging.getLogger(__name__)

# Reflectivity floor keeps return losses finite far from the Bragg wavelength.
_MIN_REFLECTIVITY = 1e-30


def grating_reflectivity(
    wavelength: float, bragg: FloatArray, fwhm: float, peak: float
) -> FloatArray:
    """Gaussian power reflectivity of each grating at ``wavelength``."""
    return peak * np.exp(-4.0 * math.log(2.0) * ((wavelength - bragg) / fwhm) ** 2)


def _grating_fiber(
    scenario: FbgScenario, reflectivity: FloatArray, group_index: float
) -> FiberSpec:
    positions = scenario.positions()
    reflectors = tuple(
        Reflector(position=float(z), return_loss=-10.0 * math.log10(max(r, _MIN_REFLECTIVITY)))
        for z, r in zip(positions, reflectivity)
    )
    return FiberSpec(
        length=float(positions[-1] + scenario.spacing),
        attenuation=0.0,
        group_index=group_index,
        backscatter_coeff=None,
        reflectors=reflectors,
    )


def fit_center(wavelengths: FloatArray, spectrum: FloatArray, window_db: float = 10.0) -> float:
    """Bragg wavelength from a parabola through the log-spectrum near its maximum.

    Only points within ``window_db`` of the maximum enter the fit; a
    Gaussian line is a parabola in log power, so the vertex is its center.
    """
    top = int(np.argmax(spectrum))
    peak = spectrum[top]
    if peak <= 0:
        raise ValueError("spectrum holds no power")
    keep = spectrum >= peak * 10.0 ** (-window_db / 10.0)
    if np.count_nonzero(keep) < 3:
        return float(wavelengths[top])
    x = wavelengths[keep] - wavelengths[top]
    a, b, _ = np.polyfit(x, np.log(spectrum[keep]), 2)
    if a >= 0:
        return float(wavelengths[top])
    return float(wavelengths[top] - b / (2.0 * a))


def fbg_sweep(
    scenario: FbgScenario,
    probe: ProbeSpec,
    detection: DetectionConfig,
    *,
    group_index: float = 1.468,
    seed: int = 0,
    threshold_db: float = 15.0,
    window: int = 501,
    fit_window_db: float = 10.0,
) -> FbgSweepResult:
    """Reflection spectrum of every grating and its fitted center wavelength.

    Before sweeping, all gratings are set to peak reflectivity and each must
    show as its own peak at its expected delay bin; otherwise the sweep is
    refused with the unresolved gratings listed. Spectra are normalized to
    power reflectivity.
    """
    if detection.mode is not DetectionMode.COHERENT:
        raise ValueError("FBG interrogation needs coherent detection")

    wave = probe_waveform(probe)
    rig = Interrogator(
        probe=wave,
        reference=reference_waveform(probe, DetectionMode.COHERENT),
        frame_length=probe.frame_length,
        detection=detection,
    )
    positions = scenario.positions()
    expected = [bin_of_position(float(z), rig.sample_period, group_index) for z in positions]

    flat = np.full(scenario.num_gratings, 10.0 ** (-scenario.peak_return_loss / 10.0))
    response = build_static_response(
        _grating_fiber(scenario, flat, group_index), wave.sample_rate, probe.wavelength
    )
    trace = acquire(response, rig, seed, frame=0)
    found = {p.bin for p in find_peaks(trace, threshold_db, window)}
    unresolved = [i for i, b in enumerate(expected) if b not in found]
    if len(set(expected)) < len(expected) or unresolved:
        logger.warning("Gratings %s are not resolved in the correlation trace", unresolved)
        raise ValueError(f"unresolved adjacent gratings (merged peaks): {unresolved}")

    wavelengths = scenario.sweep_wavelengths()
    bragg = scenario.bragg_wavelengths()
    peak_r = 10.0 ** (-scenario.peak_return_loss / 10.0)
    # Correlation gain of a unit reflector: LO amplitude gain times reference energy.
    unit = detection.lo_power_gain * float(np.sum(rig.reference.samples**2)) ** 2

    spectra = np.zeros((scenario.num_gratings, wavelengths.shape[0]))
    for j, wl in enumerate(wavelengths):
        fiber = _grating_fiber(
            scenario, grating_reflectivity(float(wl), bragg, scenario.fwhm, peak_r), group_index
        )
        response = build_static_response(fiber, wave.sample_rate, probe.wavelength)
        trace = acquire(response, rig, seed, frame=j + 1)
        spectra[:, j] = np.abs(trace.values[expected]) ** 2 / unit

    centers = np.array(
        [fit_center(wavelengths, spectra[g], fit_window_db) for g in range(scenario.num_gratings)]
    )
    logger.info(
        "Swept %d gratings over %d wavelengths", scenario.num_gratings, wavelengths.shape[0]
    )
    return FbgSweepResult(
        wavelengths=wavelengths,
        spectra=spectra,
        centers=centers,
        true_centers=bragg,
        positions=positions,
        peak_bins=tuple(expected),
    )
