"""Markdown formatters for run summaries and validation output.

Output carries no timestamps so identical runs give identical files.
"""

from __future__ import annotations

import math

import numpy as np

from cotdr.models.enums import AnalysisKind
from cotdr.models.results import PhaseCheck, RunReport
from cotdr.models.signals import Diagnostic, FbgSweepResult, Peak, TimeSeries, ToneResult


def _db(value: float) -> str:
    return f"{10.0 * math.log10(value):.1f}" if value > 0 else "-inf"


def format_peaks(peaks: tuple[Peak, ...] | list[Peak]) -> str:
    """Detected events as a markdown table."""
    if not peaks:
        return "*No peaks above threshold.*"

    lines = [
        "| Bin | Distance (m) | Refined delay (ns) | Power (dB) | Phase (rad) |",
        "|-----|--------------|--------------------|------------|-------------|",
    ]
    for p in peaks:
        lines.append(
            f"| {p.bin} | {p.distance:.3f} | {p.refined_delay * 1e9:.6f} | "
            f"{_db(p.magnitude**2)} | {p.phase:+.4f} |"
        )
    return "\n".join(lines)


def format_series_stats(series: dict[str, TimeSeries]) -> str:
    """Mean, standard deviation and peak-peak of each series."""
    if not series:
        return "*No series.*"

    lines = [
        "| Series | Frames | Gaps | Mean | Std | Peak-peak |",
        "|--------|--------|------|------|-----|-----------|",
    ]
    for label, s in series.items():
        v = s.valid_values
        if v.size:
            stats = f"{v.mean():.6e} | {v.std():.3e} | {v.max() - v.min():.3e}"
        else:
            stats = "- | - | -"
        lines.append(f"| {label} | {len(s)} | {s.gap_count} | {stats} |")
    return "\n".join(lines)


def format_rtt(series: TimeSeries) -> str:
    """One-line round-trip time summary."""
    v = series.valid_values
    if not v.size:
        return f"- **{series.label}:** no valid frames"
    return (
        f"- **{series.label}:** mean {v.mean() * 1e6:.6f} us, "
        f"sigma {v.std() * 1e12:.1f} ps over {v.size} frames"
    )


def format_tones(tones: dict[str, ToneResult]) -> str:
    if not tones:
        return "*No tone analyses.*"

    lines = [
        "| Tone | Detected | Frequency (Hz) | Amplitude | Peak-peak | SNR (dB) |",
        "|------|----------|----------------|-----------|-----------|----------|",
    ]
    for label, t in tones.items():
        lines.append(
            f"| {label} | {'yes' if t.detected else 'no'} | {t.frequency:.2f} | "
            f"{t.amplitude:.4g} | {t.pp:.4g} | {t.snr_db:.1f} |"
        )
    return "\n".join(lines)


def format_phase_checks(checks: dict[str, PhaseCheck]) -> str:
    if not checks:
        return "*No phase series.*"

    lines = [
        "| Phase series | Peak-peak (rad) | Bounds | Result |",
        "|--------------|-----------------|--------|--------|",
    ]
    for label, c in checks.items():
        bounds = f"[{c.bounds[0]:g}, {c.bounds[1]:g}]" if c.bounds else "-"
        result = {True: "PASS", False: "FAIL", None: "-"}[c.passed]
        lines.append(f"| {label} | {c.pp:.3f} | {bounds} | {result} |")
    return "\n".join(lines)


def format_thermal_lags(lags: dict[str, float]) -> str:
    if not lags:
        return "*No thermal lag fits.*"

    lines = [
        "| Fit | Tau (s) | Tau (days) |",
        "|-----|---------|------------|",
    ]
    for label, tau in lags.items():
        lines.append(f"| {label} | {tau:.4g} | {tau / 86400.0:.3f} |")
    return "\n".join(lines)


def format_fbg(label: str, result: FbgSweepResult) -> str:
    """Per-grating fitted Bragg wavelength against the configured one."""
    error = (result.centers - result.true_centers) * 1e12
    detuning = result.true_centers - result.true_centers.mean()
    recovered = result.centers - result.centers.mean()
    if detuning.std() > 0 and recovered.std() > 0:
        correlation = f"{np.corrcoef(detuning, recovered)[0, 1]:.4f}"
    else:
        correlation = "-"

    lines = [
        f"### {label}",
        "",
        f"- **Gratings:** {len(result.positions)}, sweep of {len(result.wavelengths)} steps",
        f"- **Max center error:** {np.abs(error).max():.2f} pm",
        f"- **Detuning correlation:** {correlation}",
        "",
        "| Grating | Position (m) | Bin | Configured (nm) | Fitted (nm) | Error (pm) |",
        "|---------|--------------|-----|-----------------|-------------|------------|",
    ]
    for g in range(len(result.positions)):
        bin_ = result.peak_bins[g] if g < len(result.peak_bins) else "-"
        lines.append(
            f"| {g} | {result.positions[g]:.3f} | {bin_} | "
            f"{result.true_centers[g] * 1e9:.4f} | {result.centers[g] * 1e9:.4f} | "
            f"{error[g]:+.2f} |"
        )
    return "\n".join(lines)


def format_diagnostics(diagnostics: list[Diagnostic]) -> str:
    if not diagnostics:
        return "*No diagnostics.*"
    return "\n".join(f"- {d}" for d in diagnostics)


def format_summary(report: RunReport) -> str:
    """Full run summary as markdown."""
    s = report.scenario
    lines = [
        f"# Scenario: {s.name}",
        "",
    ]
    if s.description:
        lines += [s.description, ""]
    lines += [
        f"- **Frames:** {s.frames} at {s.frame_rate:g} Hz (seed {s.seed})",
        f"- **Probe:** PRBS-{s.probe.prbs_order}{' extended' if s.probe.extended else ''}, "
        f"{s.probe.modulation.value.upper()}, {s.probe.bit_rate / 1e9:g} Gbps, "
        f"{s.probe.sample_rate / 1e9:g} GSps",
        f"- **Detection:** {s.detection.mode.value}, {s.detection.num_averages} average(s)",
        f"- **Spatial resolution:** {report.spatial_resolution:.4f} m",
        f"- **Unambiguous range:** {report.unambiguous_range:.2f} m",
        "",
    ]

    for label, peaks in report.peaks.items():
        lines += [f"## Peaks: {label}", "", format_peaks(peaks), ""]

    rtts = [
        report.series[d.label]
        for d in s.analyses
        if d.kind is AnalysisKind.RTT and d.label in report.series
    ]
    if rtts:
        lines += ["## Round-trip time", ""]
        lines += [format_rtt(r) for r in rtts]
        lines.append("")

    if report.series:
        lines += ["## Series", "", format_series_stats(report.series), ""]
    if report.tones:
        lines += ["## Tones", "", format_tones(report.tones), ""]
    if report.phase_checks:
        lines += ["## Phase variation", "", format_phase_checks(report.phase_checks), ""]

    temps = [
        report.series[d.label]
        for d in s.analyses
        if d.kind is AnalysisKind.TEMP and d.label in report.series
    ]
    if temps:
        lines += ["## Temperature", ""]
        for t in temps:
            v = t.valid_values
            if not v.size:
                lines.append(f"- **{t.label}:** no valid frames")
                continue
            lines.append(
                f"- **{t.label}:** final {v[-1]:+.4f} K, "
                f"range {v.min():+.4f} to {v.max():+.4f} K"
            )
        lines.append("")

    if report.thermal_lags:
        lines += ["## Thermal lag", "", format_thermal_lags(report.thermal_lags), ""]

    for label, result in report.fbg.items():
        lines += ["## FBG sweep", "", format_fbg(label, result), ""]

    return "\n".join(lines)
