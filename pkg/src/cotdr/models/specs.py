"""Frozen dataclass models describing probes, fibers, receivers and scenarios."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import numpy.typing as npt

from cotdr.models.enums import (
    AnalysisKind,
    DetectionMode,
    FitMethod,
    Modulation,
    PerturbationKind,
    ReflectorClass,
)


@dataclass(frozen=True, slots=True)
class ProbeSpec:
    """Probe sequence, modulation format, rates and wavelength."""

    prbs_order: int = 7
    extended: bool = False
    modulation: Modulation = Modulation.BPSK
    bit_rate: float = 10e9
    samples_per_bit: int = 5
    wavelength: float = 1550e-9
    frame_period: float = 1e-6
    seed: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.prbs_order < 2:
            raise ValueError(f"prbs_order must be >= 2, got {self.prbs_order}")
        if self.samples_per_bit < 1:
            raise ValueError(f"samples_per_bit must be >= 1, got {self.samples_per_bit}")
        if self.bit_rate <= 0:
            raise ValueError(f"bit_rate must be > 0, got {self.bit_rate}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if self.frame_period <= 0:
            raise ValueError(f"frame_period must be > 0, got {self.frame_period}")
        if self.seed is not None and len(self.seed) != self.prbs_order:
            raise ValueError(
                f"seed length {len(self.seed)} does not match prbs_order {self.prbs_order}"
            )

    @property
    def sample_rate(self) -> float:
        """Receiver sample rate in samples per second."""
        return self.bit_rate * self.samples_per_bit

    @property
    def sequence_length(self) -> int:
        """Number of bits in one probe sequence."""
        n = 2**self.prbs_order
        return n if self.extended else n - 1

    @property
    def sequence_duration(self) -> float:
        """Duration of one probe sequence in seconds."""
        return self.sequence_length / self.bit_rate

    @property
    def frame_length(self) -> int:
        """Samples per received frame."""
        return int(round(self.frame_period * self.sample_rate))


@dataclass(frozen=True, slots=True)
class Reflector:
    """A discrete Fresnel reflection event."""

    position: float
    return_loss: float

    def __post_init__(self) -> None:
        if self.return_loss <= 0:
            raise ValueError(f"return_loss must be > 0 dB, got {self.return_loss}")

    @classmethod
    def of_class(cls, position: float, reflector_class: ReflectorClass) -> Reflector:
        """Reflector with the nominal return loss of a connector or splice class."""
        return cls(position=position, return_loss=reflector_class.return_loss)

    @property
    def field_reflectivity(self) -> float:
        return float(10.0 ** (-self.return_loss / 20.0))


@dataclass(frozen=True, slots=True)
class Perturbation:
    """An environmental perturbation acting on a fiber section.

    Acoustic tones modulate the refractive index sinusoidally with peak
    ``index_amplitude``. Temperature steps apply ``delta_t`` from ``onset``
    onward; temperature series give ``series`` sampled every ``series_dt``.
    With ``lag_tau`` the series is the air temperature and the fiber follows
    it through a first-order lag with that time constant in seconds.
    """

    kind: PerturbationKind
    center: float
    extent: float
    frequency: float = 0.0
    index_amplitude: float = 0.0
    delta_t: float = 0.0
    onset: float = 0.0
    series: tuple[float, ...] = ()
    series_dt: float = 0.0
    lag_tau: float | None = None

    def __post_init__(self) -> None:
        if self.extent <= 0:
            raise ValueError(f"extent must be > 0, got {self.extent}")
        if self.kind is PerturbationKind.ACOUSTIC_TONE and self.frequency <= 0:
            raise ValueError("acoustic tone needs a positive frequency")
        if self.kind is PerturbationKind.TEMPERATURE_SERIES:
            if not self.series:
                raise ValueError("temperature series is empty")
            if self.series_dt <= 0:
                raise ValueError("temperature series needs series_dt > 0")
        if self.lag_tau is not None:
            if self.kind is not PerturbationKind.TEMPERATURE_SERIES:
                raise ValueError("lag_tau applies to temperature series only")
            if self.lag_tau <= 0:
                raise ValueError(f"lag_tau must be > 0, got {self.lag_tau}")

    @property
    def start(self) -> float:
        return self.center - self.extent / 2.0

    @property
    def end(self) -> float:
        return self.center + self.extent / 2.0


@dataclass(frozen=True, slots=True)
class FiberSpec:
    """Static description of the fiber under test.

    ``backscatter_coeff`` of None disables Rayleigh scatterers entirely;
    ``scatterer_spacing`` of None places one scatterer per delay sample on
    average. ``thermal_coeff`` is one-way, in ps/(K*km).
    """

    length: float
    attenuation: float = 0.2
    group_index: float = 1.468
    backscatter_coeff: float | None = -70.0
    scatterer_spacing: float | None = None
    thermal_coeff: float = 35.0
    reflectors: tuple[Reflector, ...] = ()
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError(f"length must be > 0, got {self.length}")
        if self.attenuation < 0:
            raise ValueError(f"attenuation must be >= 0, got {self.attenuation}")
        if not 1.4 <= self.group_index <= 1.6:
            raise ValueError(f"group_index must be in [1.4, 1.6], got {self.group_index}")
        if self.backscatter_coeff is not None and self.backscatter_coeff >= 0:
            raise ValueError(
                f"backscatter_coeff must be negative dB/m, got {self.backscatter_coeff}"
            )
        if self.scatterer_spacing is not None and self.scatterer_spacing <= 0:
            raise ValueError(f"scatterer_spacing must be > 0, got {self.scatterer_spacing}")
        for r in self.reflectors:
            if not 0.0 <= r.position <= self.length:
                raise ValueError(
                    f"reflector at {r.position} m lies outside the fiber [0, {self.length}]"
                )


@dataclass(frozen=True, slots=True)
class DetectionConfig:
    """Receiver model: detection scheme, noise, local oscillator and ADC.

    ``adc_bits`` of None is an ideal converter. Coherent noise is applied with
    standard deviation ``thermal_noise_sigma`` on I and on Q independently.
    """

    mode: DetectionMode = DetectionMode.COHERENT
    thermal_noise_sigma: float = 0.0
    lo_linewidth: float = 0.0
    lo_power_gain: float = 1.0
    adc_bits: int | None = None
    adc_full_scale: float = 1.0
    num_averages: int = 1

    def __post_init__(self) -> None:
        if self.thermal_noise_sigma < 0:
            raise ValueError("thermal_noise_sigma must be >= 0")
        if self.lo_linewidth < 0:
            raise ValueError("lo_linewidth must be >= 0")
        if self.lo_power_gain <= 0:
            raise ValueError("lo_power_gain must be > 0")
        if self.adc_bits is not None and not 1 <= self.adc_bits <= 16:
            raise ValueError(f"adc_bits must be in [1, 16], got {self.adc_bits}")
        if self.num_averages < 1:
            raise ValueError(f"num_averages must be >= 1, got {self.num_averages}")

    @property
    def phase_locked(self) -> bool:
        """Whether successive acquisitions share the LO phase epoch."""
        return self.mode is DetectionMode.DIRECT or self.lo_linewidth == 0.0


@dataclass(frozen=True, slots=True)
class FbgScenario:
    """A chain of fiber Bragg gratings and the wavelength sweep that reads it.

    Center wavelengths are either listed explicitly or generated as
    ``nominal_wavelength + detuning_amplitude * sin(2*pi*z / detuning_period)``.
    """

    num_gratings: int
    spacing: float
    sweep_start: float
    sweep_stop: float
    sweep_step: float = 8e-12
    first_position: float = 0.5
    center_wavelengths: tuple[float, ...] = ()
    nominal_wavelength: float = 1550e-9
    detuning_amplitude: float = 0.0
    detuning_period: float = 0.5
    fwhm: float = 100e-12
    peak_return_loss: float = 30.0

    def __post_init__(self) -> None:
        if self.num_gratings < 1:
            raise ValueError("num_gratings must be >= 1")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if self.sweep_step <= 0:
            raise ValueError(f"sweep step must be > 0, got {self.sweep_step}")
        if self.sweep_stop < self.sweep_start:
            raise ValueError("sweep_stop must not precede sweep_start")
        if self.fwhm <= 0:
            raise ValueError("fwhm must be > 0")
        if self.center_wavelengths and len(self.center_wavelengths) != self.num_gratings:
            raise ValueError(
                f"{len(self.center_wavelengths)} center wavelengths for "
                f"{self.num_gratings} gratings"
            )

    def positions(self) -> npt.NDArray[np.float64]:
        return self.first_position + self.spacing * np.arange(self.num_gratings)

    def bragg_wavelengths(self) -> npt.NDArray[np.float64]:
        if self.center_wavelengths:
            return np.asarray(self.center_wavelengths, dtype=np.float64)
        phase = 2.0 * math.pi * self.positions() / self.detuning_period
        return self.nominal_wavelength + self.detuning_amplitude * np.sin(phase)

    def sweep_wavelengths(self) -> npt.NDArray[np.float64]:
        count = int(math.floor((self.sweep_stop - self.sweep_start) / self.sweep_step + 1e-9)) + 1
        return self.sweep_start + self.sweep_step * np.arange(count)


@dataclass(frozen=True, slots=True)
class AnalysisDirective:
    """One analysis requested by a scenario.

    ``positions`` are fiber positions in meters (one for amplitude, two for
    rtt and phase). ``target`` names the series a tone, temp or lag directive
    reads.
    """

    kind: AnalysisKind
    label: str
    positions: tuple[float, ...] = ()
    fit: FitMethod = FitMethod.PARABOLA
    threshold_db: float | None = None
    f_min: float | None = None
    f_max: float | None = None
    target: str | None = None
    fiber_km: float | None = None
    bounds: tuple[float, float] | None = None
    fbg: FbgScenario | None = None


@dataclass(frozen=True, slots=True)
class Scenario:
    """Declarative encoding of one monitoring experiment."""

    name: str
    probe: ProbeSpec
    fiber: FiberSpec
    detection: DetectionConfig
    frames: int
    frame_rate: float
    seed: int = 0
    perturbations: tuple[Perturbation, ...] = ()
    analyses: tuple[AnalysisDirective, ...] = ()
    description: str = ""

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise ValueError(f"frames must be >= 1, got {self.frames}")
        if self.frame_rate <= 0:
            raise ValueError(f"frame_rate must be > 0, got {self.frame_rate}")

    @property
    def duration(self) -> float:
        """Observation duration in seconds."""
        return self.frames / self.frame_rate

    def directive(self, label: str) -> AnalysisDirective | None:
        return next((d for d in self.analyses if d.label == label), None)

    def with_overrides(
        self, seed: int | None = None, frames: int | None = None
    ) -> Scenario:
        """Copy with the CLI overrides applied."""
        return replace(
            self,
            seed=self.seed if seed is None else seed,
            frames=self.frames if frames is None else frames,
        )
