"""Typer CLI for cotdr."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.logging import RichHandler

from cotdr.config import CotdrConfig
from cotdr.core.scenario import validate as validate_scenario
from cotdr.models.enums import Severity
from cotdr.report.formatters import format_diagnostics

app = typer.Typer(
    name="cotdr",
    help="Correlation-OTDR laboratory: synthesize, correlate and analyze fiber traces.",
    no_args_is_help=True,
)
console = Console(stderr=True)

EXIT_INVALID = 1
EXIT_RUNTIME = 2

SeedOption = Annotated[
    int | None, typer.Option("--seed", min=0, help="Override the scenario seed")
]
FramesOption = Annotated[
    int | None, typer.Option("--frames", min=1, help="Override the number of frames")
]
OutDirOption = Annotated[
    Path | None, typer.Option("--out-dir", "-o", help="Output directory for run artifacts")
]


def _config() -> CotdrConfig:
    return CotdrConfig.load()


@app.callback()
def _setup(
    verbose: Annotated[
        int, typer.Option("--verbose", "-v", count=True, help="-v for info, -vv for debug")
    ] = 0,
) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_time=False, show_path=False)],
        force=True,
    )


def _require_valid(scenario: str) -> None:
    """Print diagnostics and exit 1 when the scenario has errors."""
    try:
        diagnostics = validate_scenario(scenario)
    except OSError as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_INVALID) from None

    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    if errors:
        console.print(f"[red bold]{len(errors)} error(s) in {scenario}:[/red bold]")
        console.print(format_diagnostics(errors), markup=False, highlight=False)
        raise typer.Exit(EXIT_INVALID)


@app.command()
def validate(scenario: str) -> None:
    """Check a scenario file (or bundled name) without writing anything."""
    try:
        diagnostics = validate_scenario(scenario)
    except OSError as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_INVALID) from None

    if not diagnostics:
        console.print(f"[green]{scenario}: valid[/green]")
        return

    failed = any(d.severity is Severity.ERROR for d in diagnostics)
    console.print(
        format_diagnostics(diagnostics),
        style="red" if failed else "yellow",
        markup=False,
        highlight=False,
    )
    if failed:
        raise typer.Exit(EXIT_INVALID)


@app.command()
def run(
    scenario: str,
    seed: SeedOption = None,
    frames: FramesOption = None,
    out_dir: OutDirOption = None,
) -> None:
    """Synthesize, correlate and analyze a scenario, writing all artifacts."""
    from cotdr.core.runner import run_scenario

    _require_valid(scenario)
    config = _config()

    try:
        report = run_scenario(scenario, config, seed=seed, frames=frames, out_dir=out_dir)
    except (ValueError, OSError, FloatingPointError) as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_RUNTIME) from None

    s = report.scenario
    console.print(
        f"[green]Ran[/green] '{s.name}': {s.frames} frame(s), seed {s.seed}, "
        f"{len(report.files)} file(s) written"
    )
    for label, tone in report.tones.items():
        verdict = "[green]detected[/green]" if tone.detected else "[dim]not detected[/dim]"
        console.print(f"  {label}: {tone.frequency:.2f} Hz, pp {tone.pp:.3f} ({verdict})")
    for label, check in report.phase_checks.items():
        if check.passed is False:
            console.print(f"  [yellow]{label}: peak-peak {check.pp:.3f} rad out of bounds")
    for label, tau in report.thermal_lags.items():
        console.print(f"  {label}: thermal lag tau {tau:.4g} s")
    for path in report.files:
        console.print(f"  {path}", style="dim")


@app.command()
def fingerprint(
    scenario: str,
    seed: SeedOption = None,
    frames: FramesOption = None,
    out_dir: OutDirOption = None,
) -> None:
    """Write the frame-averaged fingerprint and list the events it shows."""
    from rich.table import Table

    from cotdr.core.runner import fingerprint_scenario

    _require_valid(scenario)
    config = _config()

    try:
        _, peaks, path = fingerprint_scenario(
            scenario, config, seed=seed, frames=frames, out_dir=out_dir
        )
    except (ValueError, OSError, FloatingPointError) as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_RUNTIME) from None

    console.print(f"[green]Fingerprint[/green] written to {path}")
    if not peaks:
        console.print("[dim]No peaks above threshold.[/dim]")
        return

    table = Table(title=f"Events: {scenario}")
    table.add_column("Bin", style="bold")
    table.add_column("Distance (m)")
    table.add_column("Delay (ns)")
    table.add_column("Magnitude")
    for p in peaks:
        table.add_row(
            str(p.bin), f"{p.distance:.3f}", f"{p.refined_delay * 1e9:.4f}", f"{p.magnitude:.4g}"
        )
    console.print(table)


@app.command()
def analyze(
    archive: Path,
    scenario: str,
    out_dir: OutDirOption = None,
) -> None:
    """Re-run the analyses of a scenario on an existing trace archive."""
    from cotdr.core.runner import analyze_archive

    _require_valid(scenario)
    config = _config()

    try:
        report = analyze_archive(archive, scenario, config, out_dir=out_dir)
    except (ValueError, OSError, FloatingPointError) as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_RUNTIME) from None

    console.print(
        f"[green]Analyzed[/green] {report.scenario.frames} frame(s) of {archive}, "
        f"{len(report.files)} file(s) written"
    )


@app.command()
def scenarios() -> None:
    """List the bundled scenarios."""
    from rich.table import Table

    from cotdr.core.scenario import bundled_scenarios, load_scenario

    names = bundled_scenarios()
    if not names:
        console.print("[dim]No bundled scenarios.[/dim]")
        return

    table = Table(title="Bundled scenarios")
    table.add_column("Name", style="bold", no_wrap=True)
    table.add_column("Frames")
    table.add_column("Description")
    for name in names:
        s = load_scenario(name)
        table.add_row(name, str(s.frames), s.description)
    console.print(table)


def main() -> None:
    """Entry point."""
    app()


if __name__ == "__main__":
    main()
