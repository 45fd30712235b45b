"""Tests for per-frame observables and their spectral analysis."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from cotdr.core.analysis import (
    amplitude_series,
    bin_of_position,
    fit_thermal_lag,
    phase_series,
    predicted_rtt_shift,
    rtt_series,
    snap_to_bright,
    temp_estimate,
    tone_detect,
    unwrap,
)
from cotdr.models.enums import FitMethod
from cotdr.models.signals import CorrTrace, TimeSeries


def _two_bin_traces(phases_b, phases_a=None, length=8):
    traces = []
    for i, pb in enumerate(phases_b):
        values = np.zeros(length, dtype=np.complex128)
        pa = 0.0 if phases_a is None else phases_a[i]
        values[2] = np.exp(1j * pa)
        values[5] = np.exp(1j * pb)
        traces.append(CorrTrace(values=values, sample_period=1e-9, epoch=i * 1e-3))
    return traces


class TestBins:
    def test_bin_of_position(self):
        assert bin_of_position(0.0, 1e-9, 1.5) == 0
        assert bin_of_position(100.0, 1e-9, 1.5) == 1001

    def test_snap_to_bright(self):
        power = np.array([0.0, 1.0, 5.0, 2.0, 9.0, 0.0])
        assert snap_to_bright(power, 2, 1) == 2
        assert snap_to_bright(power, 2, 2) == 4
        assert snap_to_bright(power, 0, 0) == 0

    def test_snap_outside(self):
        with pytest.raises(ValueError, match="outside the trace"):
            snap_to_bright(np.zeros(4), 10, 1)


class TestRttSeries:
    def test_delay_difference(self, triangle_trace):
        shifts = [0.0, 0.1, 0.25, -0.2]
        traces = [triangle_trace([10.0, 40.3 + s]) for s in shifts]
        series = rtt_series(traces, 10, 40, fit=FitMethod.TRIANGLE, dt=1e-3)
        np.testing.assert_allclose(series.values, [(30.3 + s) * 1e-9 for s in shifts], atol=1e-18)
        assert series.gaps is None
        assert series.dt == 1e-3

    def test_missing_peak_is_gap(self, triangle_trace, caplog):
        traces = [triangle_trace([10.0, 40.0]), triangle_trace([10.0]), triangle_trace([10, 40])]
        with caplog.at_level(logging.WARNING, logger="cotdr.core.analysis"):
            series = rtt_series(traces, 10, 40, fit=FitMethod.TRIANGLE, dt=1e-3)
        assert series.gaps.tolist() == [False, True, False]
        assert series.values[1] == 0.0
        assert series.valid_values == pytest.approx([30e-9, 30e-9])
        assert "gap" in caplog.text

    def test_timing_from_epochs(self):
        traces = _two_bin_traces([0.0, 0.0, 0.0])
        series = amplitude_series(traces, 5)
        assert series.dt == pytest.approx(1e-3)

    def test_no_traces(self):
        with pytest.raises(ValueError, match="no traces"):
            rtt_series([], 1, 2)


class TestAmplitudeSeries:
    def test_constant(self, triangle_trace):
        traces = [triangle_trace([20.0], height=3.0) for _ in range(5)]
        series = amplitude_series(traces, 20, dt=0.5, label="amp")
        np.testing.assert_allclose(series.values, 9.0)
        assert series.label == "amp"


class TestPhaseSeries:
    def test_recovers_ramp(self):
        ramp = 0.5 * np.arange(20)
        series = phase_series(_two_bin_traces(ramp), 2, 5)
        np.testing.assert_allclose(series.values, ramp, atol=1e-12)

    def test_global_phase_invariant(self):
        ramp = 0.3 * np.arange(10)
        offset = np.random.default_rng(1).uniform(-np.pi, np.pi, 10)
        series = phase_series(_two_bin_traces(ramp + offset, phases_a=offset), 2, 5)
        np.testing.assert_allclose(series.values, ramp, atol=1e-12)

    def test_zero_bin_is_gap(self):
        traces = _two_bin_traces(0.2 * np.arange(6))
        traces[3].values[5] = 0.0
        series = phase_series(traces, 2, 5)
        assert series.gaps.tolist() == [False, False, False, True, False, False]
        assert series.values[3] == 0.0
        assert series.values[4] == pytest.approx(0.8)


class TestUnwrap:
    def _series(self, values):
        return TimeSeries(t0=0.0, dt=1.0, values=np.asarray(values, dtype=float), label="p")

    def test_ramp(self):
        ramp = 0.9 * np.arange(30)
        wrapped = np.angle(np.exp(1j * ramp))
        np.testing.assert_allclose(unwrap(self._series(wrapped)).values, ramp, atol=1e-12)

    def test_constant(self):
        np.testing.assert_array_equal(unwrap(self._series([1.0] * 5)).values, 1.0)

    def test_exact_pi_step_kept(self):
        out = unwrap(self._series([0.0, np.pi, 0.0]))
        np.testing.assert_array_equal(out.values, [0.0, np.pi, 0.0])


class TestToneDetect:
    FS = 2000.0

    def _series(self, values):
        return TimeSeries(t0=0.0, dt=1.0 / self.FS, values=values, label="x")

    def test_single_tone(self):
        t = np.arange(2000) / self.FS
        noise = np.random.default_rng(0).normal(0.0, 0.1, t.size)
        result = tone_detect(self._series(2.0 * np.sin(2 * np.pi * 120 * t) + noise), 100, 140)
        assert result.frequency == pytest.approx(120.0, abs=1.0)
        assert result.amplitude == pytest.approx(2.0, rel=0.05)
        assert result.pp == pytest.approx(4.0, rel=0.1)
        assert result.detected
        assert result.snr_db > 30

    def test_larger_tone_wins(self):
        t = np.arange(4000) / self.FS
        x = np.sin(2 * np.pi * 110 * t) + 3.0 * np.sin(2 * np.pi * 130 * t)
        assert tone_detect(self._series(x), 100, 140).frequency == pytest.approx(130.0, abs=0.5)

    def test_noise_only_not_detected(self):
        noise = np.random.default_rng(4).normal(0.0, 1.0, 4000)
        assert not tone_detect(self._series(noise), 100, 140, min_snr_db=15.0).detected

    def test_gaps_do_not_block_detection(self):
        t = np.arange(2000) / self.FS
        x = np.sin(2 * np.pi * 120 * t)
        gaps = np.zeros(t.size, dtype=bool)
        gaps[500:510] = True
        series = TimeSeries(
            t0=0.0, dt=1.0 / self.FS, values=np.where(gaps, 0.0, x), label="x", gaps=gaps
        )
        assert tone_detect(series, 100, 140).frequency == pytest.approx(120.0, abs=1.0)

    @pytest.mark.parametrize("band", [(0.0, 10.0), (50.0, 40.0)])
    def test_invalid_band(self, band):
        with pytest.raises(ValueError, match="invalid band"):
            tone_detect(self._series(np.zeros(4000)), *band)

    def test_too_short(self):
        with pytest.raises(ValueError, match="series too short"):
            tone_detect(self._series(np.zeros(10)), 100, 140)


class TestTemperature:
    def test_temp_estimate(self):
        rtt = TimeSeries(t0=0.0, dt=1.0, values=np.array([5e-6, 5e-6 + 70e-12]), label="rtt")
        temp = temp_estimate(rtt, fiber_km=1.0)
        np.testing.assert_allclose(temp.values, [0.0, 1.0], atol=1e-6)
        assert temp.label == "rtt_temp"

    def test_temp_reference_skips_gaps(self):
        rtt = TimeSeries(
            t0=0.0,
            dt=1.0,
            values=np.array([0.0, 1e-6, 1e-6 + 35e-12]),
            label="rtt",
            gaps=np.array([True, False, False]),
        )
        temp = temp_estimate(rtt, fiber_km=0.5)
        np.testing.assert_allclose(temp.values, [0.0, 0.0, 1.0], atol=1e-6)

    def test_fiber_km_positive(self):
        rtt = TimeSeries(t0=0.0, dt=1.0, values=np.zeros(2), label="rtt")
        with pytest.raises(ValueError, match="fiber_km"):
            temp_estimate(rtt, fiber_km=0.0)

    def test_fit_thermal_lag(self):
        values = np.zeros(300)
        values[10:] = 2.0
        air = TimeSeries(t0=0.0, dt=0.1, values=values, label="air")
        shift = predicted_rtt_shift(air, 2.0, fiber_km=1.0)
        rtt = TimeSeries(t0=0.0, dt=0.1, values=4e-6 + shift.values, label="rtt")
        assert fit_thermal_lag(air, rtt, fiber_km=1.0) == pytest.approx(2.0, rel=0.05)

    def test_fit_needs_shared_grid(self):
        air = TimeSeries(t0=0.0, dt=0.1, values=np.zeros(10), label="air")
        rtt = TimeSeries(t0=0.0, dt=0.2, values=np.zeros(10), label="rtt")
        with pytest.raises(ValueError, match="same time grid"):
            fit_thermal_lag(air, rtt, fiber_km=1.0)

    def test_predicted_shift_settles(self):
        air = TimeSeries(t0=0.0, dt=0.1, values=np.r_[0.0, np.ones(999)], label="air")
        shift = predicted_rtt_shift(air, 1.0, fiber_km=1.0)
        assert shift.values[-1] == pytest.approx(70e-12, rel=1e-3)
        assert math.isclose(shift.values[0], 0.0)
