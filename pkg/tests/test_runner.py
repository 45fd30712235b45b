"""End-to-end tests for scenario runs, re-analysis and determinism."""

from __future__ import annotations

from dataclasses import replace
from typing import NamedTuple

import numpy as np
import pytest

from cotdr.config import CotdrConfig, PipelineConfig
from cotdr.core import runner
from cotdr.core.analysis import amplitude_series, bin_of_position, tone_detect
from cotdr.core.archive import read_series_csv, to_float32
from cotdr.core.pipeline import synthesize
from cotdr.core.runner import analyze_archive, evaluate, fingerprint_scenario, run_scenario
from cotdr.core.scenario import load_scenario
from cotdr.models.results import RunReport
from cotdr.models.signals import CorrTrace
from cotdr.models.specs import Scenario

C = 299_792_458.0


def _evaluate(scenario, config=None):
    config = config or CotdrConfig()
    traces = synthesize(scenario, workers=config.pipeline.workers)
    return evaluate(scenario, to_float32(traces, is_complex=True), config)


class ToneRun(NamedTuple):
    scenario: Scenario
    traces: list[CorrTrace]
    report: RunReport


@pytest.fixture(scope="module")
def tone_run():
    scenario = load_scenario("acoustic_phase")
    traces = to_float32(synthesize(scenario, workers=4), is_complex=True)
    return ToneRun(scenario, traces, evaluate(scenario, traces, CotdrConfig()))


class TestRunScenario:
    def test_writes_artifacts(self, tmp_path):
        config = CotdrConfig(config_dir=tmp_path)
        report = run_scenario("thermal_step", config, out_dir=tmp_path / "out")
        names = sorted(p.name for p in report.files)
        assert names == [
            "fingerprint.csv",
            "rtt.csv",
            "summary.md",
            "temperature.csv",
            "traces.cotd",
        ]
        assert all(p.is_file() for p in report.files)
        assert "thermal_step" in (tmp_path / "out" / "summary.md").read_text()

    def test_frame_override(self, tmp_path):
        report = run_scenario(
            "thermal_step", CotdrConfig(config_dir=tmp_path), frames=4, out_dir=tmp_path
        )
        assert len(report.series["rtt"].values) == 4

    def test_default_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        run_scenario("thermal_step", CotdrConfig(config_dir=tmp_path), frames=2)
        assert (tmp_path / "cotdr-out" / "thermal_step" / "traces.cotd").is_file()

    def test_non_finite_traces_abort(self, tmp_path, monkeypatch):
        def broken(scenario, workers):
            values = np.full(scenario.probe.frame_length, np.nan, dtype=np.complex128)
            return [CorrTrace(values=values, sample_period=1.0 / scenario.probe.sample_rate)]

        monkeypatch.setattr(runner, "synthesize", broken)
        with pytest.raises(FloatingPointError, match="frame 0"):
            run_scenario("thermal_step", CotdrConfig(config_dir=tmp_path), out_dir=tmp_path)
        assert not (tmp_path / "traces.cotd").exists()


class TestDeterminism:
    def test_worker_count_does_not_change_outputs(self, tmp_path):
        one = CotdrConfig(config_dir=tmp_path, pipeline=PipelineConfig(workers=1))
        four = CotdrConfig(config_dir=tmp_path, pipeline=PipelineConfig(workers=4))
        a = run_scenario("thermal_step", one, out_dir=tmp_path / "a")
        run_scenario("thermal_step", four, out_dir=tmp_path / "b")
        for path in a.files:
            assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()

    def test_analyze_reproduces_run(self, tmp_path):
        config = CotdrConfig(config_dir=tmp_path)
        run_scenario("thermal_step", config, out_dir=tmp_path / "run")
        analyze_archive(
            tmp_path / "run" / "traces.cotd", "thermal_step", config, out_dir=tmp_path / "again"
        )
        for name in ("rtt.csv", "temperature.csv", "fingerprint.csv", "summary.md"):
            first = (tmp_path / "run" / name).read_bytes()
            assert first == (tmp_path / "again" / name).read_bytes()

    def test_analyze_rejects_other_scenario(self, tmp_path):
        config = CotdrConfig(config_dir=tmp_path)
        run_scenario("thermal_step", config, frames=2, out_dir=tmp_path)
        with pytest.raises(ValueError, match="does not match the scenario"):
            analyze_archive(
                tmp_path / "traces.cotd", "connector_fingerprint", config, out_dir=tmp_path
            )


class TestThermalStep:
    def test_rtt_grows_by_70_ps(self, tmp_path):
        report = run_scenario("thermal_step", CotdrConfig(config_dir=tmp_path), out_dir=tmp_path)
        rtt = report.series["rtt"].values
        assert rtt[5:].mean() - rtt[:5].mean() == pytest.approx(70e-12, abs=0.7e-12)

        back = read_series_csv(tmp_path / "temperature.csv")
        np.testing.assert_allclose(back.values[:5], 0.0, atol=0.03)
        np.testing.assert_allclose(back.values[5:], 1.0, atol=0.03)


class TestBuriedSpan:
    def test_lag_recovered(self, tmp_path):
        report = run_scenario("buried_span", CotdrConfig(config_dir=tmp_path), out_dir=tmp_path)
        assert report.thermal_lags["lag"] == pytest.approx(20.0, rel=0.1)

        predicted = read_series_csv(tmp_path / "lag.csv")
        measured = report.series["rtt"].values
        np.testing.assert_allclose(predicted.values, measured - measured[0], atol=10e-12)
        assert "## Thermal lag" in (tmp_path / "summary.md").read_text()


class TestFingerprint:
    def test_connectors_found(self, tmp_path):
        fp, peaks, path = fingerprint_scenario(
            "connector_fingerprint", CotdrConfig(config_dir=tmp_path), out_dir=tmp_path
        )
        assert path == tmp_path / "fingerprint.csv"
        distances = [p.distance for p in peaks]
        assert any(abs(d - 0.3) <= 0.1 for d in distances)
        assert any(abs(d - 400.0) <= 0.5 for d in distances)
        assert max(distances) <= 400.5
        assert fp.distance[-1] > 400.0


class TestRoundTripTime:
    def test_mean_and_scatter(self):
        report = _evaluate(load_scenario("span_rtt"))
        rtt = report.series["rtt"].valid_values
        assert rtt.mean() == pytest.approx(2 * 1.5 * 399.7 / C, rel=1e-3)
        assert 30e-12 <= rtt.std() <= 150e-12


class TestDelayAccuracy:
    def test_rms_error_falls_with_averaging(self):
        scenario = load_scenario("delay_accuracy_10g")
        truth = 2 * 1.468 * (2.6311 - 1.0123) / C
        rms = []
        for n in (1, 10, 100):
            averaged = replace(scenario, detection=replace(scenario.detection, num_averages=n))
            traces = to_float32(synthesize(averaged, workers=4), is_complex=False)
            series = evaluate(averaged, traces, CotdrConfig()).series["rtt"]
            rms.append(float(np.sqrt(np.mean((series.valid_values - truth) ** 2))))
        assert all(r <= 2e-12 for r in rms)
        assert rms[0] > rms[1] > rms[2]


class TestOneBitSlicer:
    def test_peak_survives_quantization(self):
        scenario = load_scenario("slicer_1bit")
        linear = replace(scenario, detection=replace(scenario.detection, adc_bits=None))
        peaks = _evaluate(scenario).peaks["reflector"]
        assert all(p.distance <= scenario.fiber.length for p in peaks)
        (sliced,) = peaks
        (reference,) = _evaluate(linear).peaks["reflector"]
        assert sliced.bin == reference.bin
        assert sliced.refined_delay == pytest.approx(2 * 1.468 * 1.2345 / C, abs=1e-10)


class TestAcousticTone:
    def test_end_to_end_tone(self, tone_run):
        tone = tone_run.report.tones["end_to_end_tone"]
        assert tone.detected
        assert tone.frequency == pytest.approx(120.0, abs=1.0)
        assert tone.pp == pytest.approx(7.0, rel=0.05)

    def test_section_checks(self, tone_run):
        perturbed = tone_run.report.phase_checks["perturbed_section"]
        assert perturbed.passed
        assert perturbed.pp == pytest.approx(7.0, abs=0.7)
        distant = tone_run.report.phase_checks["distant_section"]
        assert distant.passed
        assert distant.pp < 0.5

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_section_checks_hold_across_seeds(self, seed):
        scenario = load_scenario("acoustic_phase").with_overrides(seed=seed, frames=400)
        scenario = replace(scenario, fiber=replace(scenario.fiber, rng_seed=seed))
        checks = _evaluate(scenario).phase_checks
        assert checks["perturbed_section"].passed
        assert checks["distant_section"].passed

    def test_only_some_section_bins_carry_the_tone(self, tone_run):
        scenario, traces = tone_run.scenario, tone_run.traces
        ts, ng = traces[0].sample_period, scenario.fiber.group_index
        first, last = (bin_of_position(z, ts, ng) for z in (199.0, 201.0))
        peaks = [
            tone_detect(
                amplitude_series(traces, b, dt=1.0 / scenario.frame_rate), 20.0, 900.0
            ).frequency
            for b in range(first, last + 1)
        ]
        assert any(abs(f - 120.0) <= 1.0 for f in peaks)
        assert any(abs(f - 120.0) > 1.0 for f in peaks)

    def test_quiet_fiber_has_no_tone(self):
        report = _evaluate(load_scenario("quiet_fiber"))
        assert not report.tones["end_to_end_tone"].detected
