"""Enumerations for the cotdr domain model."""

from __future__ import annotations

from enum import Enum


class Modulation(str, Enum):
    """Probe modulation format."""

    OOK = "ook"
    BPSK = "bpsk"


class DetectionMode(str, Enum):
    """Receiver detection scheme."""

    DIRECT = "direct"
    COHERENT = "coherent"


class PerturbationKind(str, Enum):
    """Environmental perturbation acting on a fiber section."""

    ACOUSTIC_TONE = "acoustic_tone"
    TEMPERATURE_STEP = "temperature_step"
    TEMPERATURE_SERIES = "temperature_series"


class ReflectorClass(str, Enum):
    """Discrete reflection event classes with their nominal return loss."""

    PC = "pc"
    APC = "apc"
    SPLICE = "splice"

    @property
    def return_loss(self) -> float:
        """Nominal return loss in dB."""
        return _NOMINAL_RETURN_LOSS[self]


_NOMINAL_RETURN_LOSS: dict[ReflectorClass, float] = {
    ReflectorClass.PC: 40.0,
    ReflectorClass.APC: 55.0,
    ReflectorClass.SPLICE: 65.0,
}


class AnalysisKind(str, Enum):
    """Analysis directive carried by a scenario."""

    PEAKS = "peaks"
    RTT = "rtt"
    AMPLITUDE = "amplitude"
    PHASE = "phase"
    TONE = "tone"
    TEMP = "temp"
    LAG = "lag"
    FBG = "fbg"


class FitMethod(str, Enum):
    """Sub-sample pulse fitting method."""

    PARABOLA = "parabola"
    TRIANGLE = "triangle"


class Severity(str, Enum):
    """Severity of a scenario diagnostic."""

    ERROR = "error"
    WARNING = "warning"
