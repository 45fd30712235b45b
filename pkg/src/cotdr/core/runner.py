"""Scenario run orchestrator."""

from __future__ import annotations

import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from cotdr.config import CotdrConfig
from cotdr.core import archive
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
)
from cotdr.core.correlator import average, find_peaks, fingerprint, phase_at
from cotdr.core.fbg import fbg_sweep
from cotdr.core.fibermodel import round_trip_delay
from cotdr.core.pipeline import synthesize
from cotdr.core.probegen import spatial_resolution, unambiguous_range
from cotdr.core.scenario import load_scenario
from cotdr.models.enums import AnalysisKind, DetectionMode, PerturbationKind
from cotdr.models.results import PhaseCheck, RunReport
from cotdr.models.signals import CorrTrace, Fingerprint, Peak, TimeSeries
from cotdr.models.specs import AnalysisDirective, Scenario
from cotdr.report.formatters import format_summary

logger = logging.getLogger(__name__)


def _is_complex(scenario: Scenario) -> bool:
    return scenario.detection.mode is DetectionMode.COHERENT


def _check_finite(traces: list[CorrTrace]) -> None:
    for i, t in enumerate(traces):
        if not np.all(np.isfinite(t.values)):
            raise FloatingPointError(f"non-finite values in the correlation trace of frame {i}")


def _bins(scenario: Scenario, d: AnalysisDirective, sample_period: float) -> list[int]:
    return [bin_of_position(z, sample_period, scenario.fiber.group_index) for z in d.positions]


def _echo_end(scenario: Scenario, trace: CorrTrace) -> int:
    """First bin past the last fiber echo and its correlation main lobe."""
    end = round_trip_delay(scenario.fiber, scenario.fiber.length) / trace.sample_period
    return min(len(trace), math.ceil(end) + scenario.probe.samples_per_bit + 1)


def _air_temperature(scenario: Scenario, rtt: TimeSeries) -> TimeSeries:
    """The scenario's temperature series sampled on the frame grid of ``rtt``."""
    (p,) = (q for q in scenario.perturbations if q.kind is PerturbationKind.TEMPERATURE_SERIES)
    grid = p.series_dt * np.arange(len(p.series))
    values = np.interp(rtt.times, grid, np.asarray(p.series, dtype=np.float64))
    return TimeSeries(t0=rtt.t0, dt=rtt.dt, values=values, label="air")


def evaluate(scenario: Scenario, traces: list[CorrTrace], config: CotdrConfig) -> RunReport:
    """Run every analysis directive of ``scenario`` over ``traces`` in order."""
    if not traces:
        raise ValueError("no traces to evaluate")
    cfg = config.analysis
    ng = scenario.fiber.group_index
    ts = traces[0].sample_period
    dt = 1.0 / scenario.frame_rate

    mean = average(traces, power=True)
    fp = fingerprint(mean, ng)
    report = RunReport(
        scenario=scenario,
        fingerprint=fp,
        spatial_resolution=spatial_resolution(scenario.probe, ng),
        unambiguous_range=unambiguous_range(scenario.probe, ng),
    )

    for d in scenario.analyses:
        threshold = d.threshold_db if d.threshold_db is not None else cfg.peak_threshold_db
        if d.kind is AnalysisKind.PEAKS:
            found = find_peaks(
                mean, threshold, cfg.median_window, ng, d.fit, _echo_end(scenario, mean)
            )
            first = traces[0]
            report.peaks[d.label] = tuple(
                replace(p, phase=phase_at(first, p.bin)) if first.values[p.bin] != 0 else p
                for p in found
            )
        elif d.kind is AnalysisKind.RTT:
            a, b = _bins(scenario, d, ts)
            report.series[d.label] = rtt_series(
                traces,
                a,
                b,
                search_radius=cfg.snap_radius_bins,
                threshold_db=threshold,
                fit=d.fit,
                dt=dt,
                label=d.label,
            )
        elif d.kind is AnalysisKind.AMPLITUDE:
            (z,) = _bins(scenario, d, ts)
            b = snap_to_bright(fp.power, z, cfg.snap_radius_bins)
            report.series[d.label] = amplitude_series(traces, b, dt=dt, label=d.label)
        elif d.kind is AnalysisKind.PHASE:
            a, b = (
                snap_to_bright(fp.power, z, cfg.snap_radius_bins) for z in _bins(scenario, d, ts)
            )
            series = phase_series(traces, a, b, dt=dt, label=d.label)
            report.series[d.label] = series
            valid = series.valid_values
            pp = float(valid.max() - valid.min()) if valid.size else 0.0
            report.phase_checks[d.label] = PhaseCheck(pp=pp, bounds=d.bounds)
        elif d.kind is AnalysisKind.TONE:
            assert d.target is not None and d.f_min is not None and d.f_max is not None
            min_snr = d.threshold_db if d.threshold_db is not None else cfg.tone_min_snr_db
            report.tones[d.label] = tone_detect(
                report.series[d.target], d.f_min, d.f_max, min_snr
            )
        elif d.kind is AnalysisKind.TEMP:
            assert d.target is not None and d.fiber_km is not None
            kelvin = temp_estimate(
                report.series[d.target], d.fiber_km, scenario.fiber.thermal_coeff
            )
            report.series[d.label] = replace(kelvin, label=d.label)
        elif d.kind is AnalysisKind.LAG:
            assert d.target is not None and d.fiber_km is not None
            rtt = report.series[d.target]
            air = _air_temperature(scenario, rtt)
            coeff = scenario.fiber.thermal_coeff
            tau = fit_thermal_lag(air, rtt, d.fiber_km, coeff)
            logger.info("Thermal lag '%s': tau %.4g s", d.label, tau)
            shift = predicted_rtt_shift(air, tau, d.fiber_km, coeff)
            report.series[d.label] = replace(shift, label=d.label)
            report.thermal_lags[d.label] = tau
        elif d.kind is AnalysisKind.FBG:
            assert d.fbg is not None
            report.fbg[d.label] = fbg_sweep(
                d.fbg,
                scenario.probe,
                scenario.detection,
                group_index=ng,
                seed=scenario.seed,
                threshold_db=threshold,
                window=cfg.median_window,
                fit_window_db=cfg.fbg_fit_window_db,
            )
    return report


def _write_table(path: Path, rows: dict[str, list[object]], float_format: str) -> None:
    pd.DataFrame(rows).to_csv(path, index=False, float_format=float_format, lineterminator="\n")


def write_outputs(report: RunReport, out_dir: Path, config: CotdrConfig) -> RunReport:
    """Write the fingerprint, one CSV per analysis and the summary; return with ``files``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = config.output.float_format
    files = list(report.files)

    path = out_dir / config.output.fingerprint_name
    archive.write_fingerprint_csv(path, report.fingerprint, fmt)
    files.append(path)

    for d in report.scenario.analyses:
        path = out_dir / f"{d.label}.csv"
        if d.label in report.series:
            archive.write_series_csv(path, report.series[d.label], fmt)
        elif d.label in report.peaks:
            peaks = report.peaks[d.label]
            _write_table(
                path,
                {
                    "bin": [p.bin for p in peaks],
                    "distance_m": [p.distance for p in peaks],
                    "refined_delay_seconds": [p.refined_delay for p in peaks],
                    "magnitude": [p.magnitude for p in peaks],
                    "phase_rad": [p.phase for p in peaks],
                },
                fmt,
            )
        elif d.label in report.tones:
            t = report.tones[d.label]
            _write_table(
                path,
                {
                    "frequency_hz": [t.frequency],
                    "amplitude": [t.amplitude],
                    "pp": [t.pp],
                    "snr_db": [t.snr_db],
                    "detected": [t.detected],
                },
                fmt,
            )
        elif d.label in report.fbg:
            archive.write_spectra_csv(path, report.fbg[d.label], fmt)
        else:
            continue
        files.append(path)

    path = out_dir / config.output.report_name
    path.write_text(format_summary(report), encoding="utf-8")
    files.append(path)
    return replace(report, files=tuple(files))


def _out_dir(scenario: Scenario, out_dir: Path | None, config: CotdrConfig) -> Path:
    return Path(out_dir) if out_dir is not None else Path(config.output.out_root) / scenario.name


def run_scenario(
    ref: str | Path,
    config: CotdrConfig,
    *,
    seed: int | None = None,
    frames: int | None = None,
    out_dir: Path | None = None,
) -> RunReport:
    """Synthesize, archive and evaluate a scenario.

    1. Load and validate the scenario (ValueError on any error)
    2. Synthesize one correlation trace per frame
    3. Write the float32 trace archive
    4. Evaluate the analyses on the archived (float32) traces
    5. Write fingerprint, per-analysis CSVs and the summary
    """
    scenario = load_scenario(ref).with_overrides(seed=seed, frames=frames)
    target = _out_dir(scenario, out_dir, config)
    target.mkdir(parents=True, exist_ok=True)

    traces = synthesize(scenario, config.pipeline.workers)
    _check_finite(traces)

    archive_path = target / config.output.archive_name
    archive.write_archive(archive_path, traces, _is_complex(scenario))
    stored = archive.to_float32(traces, _is_complex(scenario))

    report = replace(evaluate(scenario, stored, config), files=(archive_path,))
    logger.info("Run of '%s' written to %s", scenario.name, target)
    return write_outputs(report, target, config)


def analyze_archive(
    archive_path: Path,
    ref: str | Path,
    config: CotdrConfig,
    *,
    out_dir: Path | None = None,
) -> RunReport:
    """Re-run the analyses of a scenario on an existing trace archive."""
    scenario = load_scenario(ref)
    stored = archive.read_archive(archive_path)
    probe = scenario.probe
    if not math.isclose(stored.sample_rate, probe.sample_rate, rel_tol=1e-12):
        raise ValueError(
            f"archive sample rate {stored.sample_rate} Hz does not match the scenario "
            f"({probe.sample_rate} Hz)"
        )
    if stored.frame_length != probe.frame_length:
        raise ValueError(
            f"archive frame length {stored.frame_length} does not match the scenario "
            f"({probe.frame_length})"
        )
    scenario = scenario.with_overrides(frames=stored.frame_count)
    traces = stored.traces(scenario.frame_rate)
    _check_finite(traces)
    report = evaluate(scenario, traces, config)
    return write_outputs(report, _out_dir(scenario, out_dir, config), config)


def fingerprint_scenario(
    ref: str | Path,
    config: CotdrConfig,
    *,
    seed: int | None = None,
    frames: int | None = None,
    out_dir: Path | None = None,
) -> tuple[Fingerprint, tuple[Peak, ...], Path]:
    """Frame-averaged fingerprint of a scenario and the events it shows."""
    scenario = load_scenario(ref).with_overrides(seed=seed, frames=frames)
    traces = synthesize(scenario, config.pipeline.workers)
    _check_finite(traces)
    mean = average(archive.to_float32(traces, _is_complex(scenario)), power=True)
    fp = fingerprint(mean, scenario.fiber.group_index)
    peaks = tuple(
        find_peaks(
            mean,
            config.analysis.peak_threshold_db,
            config.analysis.median_window,
            scenario.fiber.group_index,
            max_bin=_echo_end(scenario, mean),
        )
    )
    target = _out_dir(scenario, out_dir, config)
    target.mkdir(parents=True, exist_ok=True)
    path = target / config.output.fingerprint_name
    archive.write_fingerprint_csv(path, fp, config.output.float_format)
    return fp, peaks, path
