"""Tests for wavelength-swept FBG interrogation."""

from __future__ import annotations

import numpy as np
import pytest

from cotdr.core.fbg import fbg_sweep, fit_center, grating_reflectivity
from cotdr.core.scenario import load_scenario
from cotdr.models.enums import DetectionMode, Modulation
from cotdr.models.specs import DetectionConfig, FbgScenario, ProbeSpec

GROUP_INDEX = 1.49896229


@pytest.fixture
def fbg_probe():
    return ProbeSpec(
        prbs_order=11,
        extended=True,
        modulation=Modulation.BPSK,
        bit_rate=5e9,
        samples_per_bit=2,
        frame_period=5e-7,
    )


@pytest.fixture
def fbg_detection():
    return DetectionConfig(mode=DetectionMode.COHERENT, thermal_noise_sigma=1e-3)


def _chain(**overrides):
    params = {
        "num_gratings": 1,
        "spacing": 0.05,
        "sweep_start": 1549.75e-9,
        "sweep_stop": 1550.25e-9,
        "center_wavelengths": (1550.05e-9,),
    }
    params.update(overrides)
    return FbgScenario(**params)


class TestReflectivity:
    def test_half_power_at_half_width(self):
        bragg = np.array([1550e-9])
        r = grating_reflectivity(1550e-9 + 50e-12, bragg, 100e-12, 1e-3)
        assert r[0] == pytest.approx(0.5e-3)
        assert grating_reflectivity(1550e-9, bragg, 100e-12, 1e-3)[0] == pytest.approx(1e-3)


class TestFitCenter:
    def test_exact_on_gaussian(self):
        wl = 1549.75e-9 + 8e-12 * np.arange(63)
        spectrum = grating_reflectivity(1550.0123e-9, wl, 100e-12, 1e-3)
        assert fit_center(wl, spectrum) == pytest.approx(1550.0123e-9, abs=1e-15)

    def test_empty_spectrum(self):
        with pytest.raises(ValueError, match="no power"):
            fit_center(np.arange(5.0), np.zeros(5))


class TestFbgSweep:
    def test_single_grating(self, fbg_probe, fbg_detection):
        result = fbg_sweep(_chain(), fbg_probe, fbg_detection, group_index=GROUP_INDEX, seed=1)
        assert result.spectra.shape == (1, 63)
        assert abs(result.centers[0] - 1550.05e-9) <= 4e-12
        assert result.spectra.max() == pytest.approx(1e-3, rel=0.1)

    def test_unresolved_gratings(self, fbg_probe, fbg_detection):
        chain = _chain(num_gratings=3, spacing=0.005, center_wavelengths=())
        with pytest.raises(ValueError, match="unresolved adjacent gratings"):
            fbg_sweep(chain, fbg_probe, fbg_detection, group_index=GROUP_INDEX)

    def test_needs_coherent_detection(self, fbg_probe):
        direct = DetectionConfig(mode=DetectionMode.DIRECT)
        with pytest.raises(ValueError, match="coherent"):
            fbg_sweep(_chain(), fbg_probe, direct, group_index=GROUP_INDEX)

    def test_bundled_chain_recovers_detuning(self):
        scenario = load_scenario("fbg_sweep")
        directive = scenario.directive("gratings")
        result = fbg_sweep(
            directive.fbg,
            scenario.probe,
            scenario.detection,
            group_index=scenario.fiber.group_index,
            seed=scenario.seed,
            threshold_db=directive.threshold_db,
        )
        assert np.diff(result.peak_bins).tolist() == [5] * 19
        error = result.centers - result.true_centers
        assert np.abs(error).max() <= 4e-12
        detuning = result.true_centers - result.true_centers.mean()
        recovered = result.centers - result.centers.mean()
        assert np.corrcoef(detuning, recovered)[0, 1] >= 0.99
