"""Array-carrying models: waveforms, responses, frames, traces and series.

These hold numpy arrays, so they compare by identity (``eq=False``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from cotdr.models.enums import DetectionMode, Severity

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complexfloating]
BoolArray = npt.NDArray[np.bool_]


@dataclass(frozen=True, slots=True, eq=False)
class Waveform:
    """A sampled baseband waveform."""

    samples: FloatArray
    sample_rate: float

    def __len__(self) -> int:
        return int(self.samples.shape[0])


@dataclass(frozen=True, slots=True, eq=False)
class ImpulseResponse:
    """Complex round-trip impulse response of the fiber, frozen at ``epoch``.

    Besides the binned ``taps`` it keeps the contributions they were rendered
    from (one-way position, complex amplitude, reflector flag) so that
    perturbations can re-render phase and delay changes.
    """

    taps: ComplexArray
    sample_period: float
    epoch: float
    group_index: float
    positions: FloatArray
    amplitudes: ComplexArray
    is_reflector: BoolArray
    merged_reflectors: bool = False

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.sample_period

    def __len__(self) -> int:
        return int(self.taps.shape[0])


@dataclass(frozen=True, slots=True, eq=False)
class RxFrame:
    """One received frame of detected samples."""

    samples: npt.NDArray[np.generic]
    sample_rate: float
    epoch: float
    detection: DetectionMode


@dataclass(frozen=True, slots=True, eq=False)
class CorrTrace:
    """Complex correlation trace indexed by round-trip-delay sample."""

    values: ComplexArray
    sample_period: float
    epoch: float = 0.0
    num_averaged: int = 1

    def __post_init__(self) -> None:
        if self.num_averaged < 1:
            raise ValueError(f"num_averaged must be >= 1, got {self.num_averaged}")

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True, slots=True)
class DelayEstimate:
    """Sub-sample delay estimate; ``fallback`` marks an unrefined raw bin."""

    delay: float
    fallback: bool = False


@dataclass(frozen=True, slots=True)
class Peak:
    """A detected reflection or bright backscatter point."""

    bin: int
    refined_delay: float
    magnitude: float
    phase: float
    distance: float = 0.0


@dataclass(frozen=True, slots=True, eq=False)
class Fingerprint:
    """Power versus distance view of a correlation trace."""

    power: FloatArray
    distance: FloatArray
    delay: FloatArray


@dataclass(frozen=True, slots=True, eq=False)
class TimeSeries:
    """Scalar observable sampled once per frame.

    ``gaps`` marks frames where the observable was unavailable; their values
    hold 0.0 and are never interpolated.
    """

    t0: float
    dt: float
    values: FloatArray
    label: str
    gaps: BoolArray | None = None

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.gaps is not None and self.gaps.shape != self.values.shape:
            raise ValueError("gap mask does not match the series length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"series '{self.label}' holds non-finite values")

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def times(self) -> FloatArray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def valid(self) -> BoolArray:
        if self.gaps is None:
            return np.ones(len(self), dtype=bool)
        return ~self.gaps

    @property
    def valid_values(self) -> FloatArray:
        return self.values[self.valid]

    @property
    def gap_count(self) -> int:
        return 0 if self.gaps is None else int(np.count_nonzero(self.gaps))


@dataclass(frozen=True, slots=True)
class ToneResult:
    """Dominant spectral line of a series inside a frequency band."""

    frequency: float
    amplitude: float
    pp: float
    snr_db: float
    detected: bool = True


@dataclass(frozen=True, slots=True, eq=False)
class FbgSweepResult:
    """Per-grating reflection spectra from a wavelength sweep."""

    wavelengths: FloatArray
    spectra: FloatArray  # [grating, wavelength]
    centers: FloatArray
    true_centers: FloatArray
    positions: FloatArray
    peak_bins: tuple[int, ...] = field(default=())


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """One scenario validation finding."""

    severity: Severity
    location: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.severity.value}: {self.location}: {self.message}"
