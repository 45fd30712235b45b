"""Domain models for cotdr."""

from cotdr.models.enums import (
    AnalysisKind,
    DetectionMode,
    FitMethod,
    Modulation,
    PerturbationKind,
    ReflectorClass,
    Severity,
)
from cotdr.models.results import PhaseCheck, RunReport
from cotdr.models.signals import (
    CorrTrace,
    DelayEstimate,
    Diagnostic,
    FbgSweepResult,
    Fingerprint,
    ImpulseResponse,
    Peak,
    RxFrame,
    TimeSeries,
    ToneResult,
    Waveform,
)
from cotdr.models.specs import (
    AnalysisDirective,
    DetectionConfig,
    FbgScenario,
    FiberSpec,
    Perturbation,
    ProbeSpec,
    Reflector,
    Scenario,
)

__all__ = [
    "AnalysisDirective",
    "AnalysisKind",
    "CorrTrace",
    "DelayEstimate",
    "DetectionConfig",
    "DetectionMode",
    "Diagnostic",
    "FbgScenario",
    "FbgSweepResult",
    "FiberSpec",
    "Fingerprint",
    "FitMethod",
    "ImpulseResponse",
    "Modulation",
    "Peak",
    "Perturbation",
    "PhaseCheck",
    "PerturbationKind",
    "ProbeSpec",
    "Reflector",
    "ReflectorClass",
    "RunReport",
    "RxFrame",
    "Scenario",
    "Severity",
    "TimeSeries",
    "ToneResult",
    "Waveform",
]
