"""Run results handed from the orchestrator to the report formatters."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from cotdr.models.signals import FbgSweepResult, Fingerprint, Peak, TimeSeries, ToneResult
from cotdr.models.specs import Scenario


@dataclass(frozen=True, slots=True)
class PhaseCheck:
    """Peak-peak variation of a phase series against its configured bounds."""

    pp: float
    bounds: tuple[float, float] | None = None

    @property
    def passed(self) -> bool | None:
        if self.bounds is None:
            return None
        return self.bounds[0] <= self.pp <= self.bounds[1]


@dataclass(frozen=True, slots=True, eq=False)
class RunReport:
    """Everything a run or re-analysis produced, keyed by directive label."""

    scenario: Scenario
    fingerprint: Fingerprint
    spatial_resolution: float
    unambiguous_range: float
    peaks: dict[str, tuple[Peak, ...]] = field(default_factory=dict)
    series: dict[str, TimeSeries] = field(default_factory=dict)
    tones: dict[str, ToneResult] = field(default_factory=dict)
    phase_checks: dict[str, PhaseCheck] = field(default_factory=dict)
    thermal_lags: dict[str, float] = field(default_factory=dict)
    fbg: dict[str, FbgSweepResult] = field(default_factory=dict)
    files: tuple[Path, ...] = ()
