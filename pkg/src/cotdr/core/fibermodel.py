"""Fiber channel model: Rayleigh speckle, Fresnel reflectors and perturbations.

The response is built from discrete contributions (scatterers and reflectors)
at one-way positions z. Each contributes at round-trip delay 2*n_g*z/c with a
two-way attenuated complex amplitude. Scatterers are binned to the delay
sample they fall in; reflectors are split linearly between the two
neighbouring samples so their sub-sample delay survives into the trace.
"""

from __future__ import annotations

import functools
import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.signal import lfilter, lfilter_zi

from cotdr.models.enums import PerturbationKind
from cotdr.models.signals import ComplexArray, FloatArray, ImpulseResponse, TimeSeries
from cotdr.models.specs import FiberSpec, Perturbation

logger = logging.getLogger(__name__)

PS_PER_K_KM_TO_S_PER_K_M = 1e-12 / 1e3


def round_trip_delay(spec: FiberSpec, position: float) -> float:
    """Round-trip group delay to ``position`` meters."""
    if not 0.0 <= position <= spec.length:
        raise ValueError(f"position {position} m outside the fiber [0, {spec.length}]")
    return 2.0 * spec.group_index * position / SPEED_OF_LIGHT


def position_of_delay(spec: FiberSpec, delay: float) -> float:
    """Inverse of :func:`round_trip_delay` without range checks."""
    return SPEED_OF_LIGHT * delay / (2.0 * spec.group_index)


def thermal_delay_shift(spec: FiberSpec, section_length: float, delta_t: float) -> float:
    """One-way delay change in seconds of ``section_length`` km heated by ``delta_t`` K."""
    if section_length < 0:
        raise ValueError(f"section_length must be >= 0, got {section_length}")
    return spec.thermal_coeff * 1e-12 * section_length * delta_t


def thermal_index_change(spec: FiberSpec, delta_t: float) -> float:
    """Refractive index change for ``delta_t`` K implied by the thermal delay coefficient."""
    return spec.thermal_coeff * PS_PER_K_KM_TO_S_PER_K_M * SPEED_OF_LIGHT * delta_t


def one_way_phase(delta_n: float, extent: float, wavelength: float) -> float:
    """One-way optical phase in radians picked up over ``extent`` meters."""
    return 2.0 * math.pi * delta_n * extent / wavelength


def _render_taps(
    delays: FloatArray,
    amplitudes: ComplexArray,
    is_reflector: npt.NDArray[np.bool_],
    sample_period: float,
    num_taps: int,
) -> ComplexArray:
    """Bin contributions onto the delay grid."""
    position = delays / sample_period
    needed = int(np.floor(position.max())) + 2 if position.size else 0
    taps = np.zeros(max(num_taps, needed), dtype=np.complex128)

    scat = ~is_reflector
    np.add.at(taps, np.floor(position[scat]).astype(np.int64), amplitudes[scat])

    k = np.floor(position[is_reflector]).astype(np.int64)
    frac = position[is_reflector] - k
    a = amplitudes[is_reflector]
    np.add.at(taps, k, a * (1.0 - frac))
    np.add.at(taps, k + 1, a * frac)
    return taps


def build_static_response(
    spec: FiberSpec, sample_rate: float, wavelength: float
) -> ImpulseResponse:
    """Build the unperturbed complex round-trip response of ``spec``.

    Scatterers sit at uniform random positions (Poisson count, mean spacing
    ``scatterer_spacing`` or one per delay sample) with Rayleigh field
    amplitudes whose mean power per meter is ``10**(backscatter_coeff/10)``
    and uniform phases. Reflectors contribute ``10**(-RL/20)`` at phase 0.
    ``wavelength`` does not enter the static speckle, whose phases are random.
    """
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be > 0, got {sample_rate}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")

    sample_period = 1.0 / sample_rate
    rng = np.random.default_rng(spec.rng_seed)

    positions: list[FloatArray] = []
    amplitudes: list[ComplexArray] = []
    flags: list[npt.NDArray[np.bool_]] = []

    if spec.backscatter_coeff is not None:
        bin_length = position_of_delay(spec, sample_period)
        spacing = spec.scatterer_spacing or bin_length
        count = int(rng.poisson(spec.length / spacing))
        z = np.sort(rng.uniform(0.0, spec.length, count))
        mean_power = 10.0 ** (spec.backscatter_coeff / 10.0) * spacing
        magnitude = rng.rayleigh(scale=math.sqrt(mean_power / 2.0), size=count)
        phase = rng.uniform(0.0, 2.0 * math.pi, count)
        positions.append(z)
        amplitudes.append(magnitude * np.exp(1j * phase))
        flags.append(np.zeros(count, dtype=bool))

    if spec.reflectors:
        z = np.array([r.position for r in spec.reflectors], dtype=np.float64)
        positions.append(z)
        amplitudes.append(
            np.array([r.field_reflectivity for r in spec.reflectors], dtype=np.complex128)
        )
        flags.append(np.ones(z.size, dtype=bool))

    z_all = np.concatenate(positions) if positions else np.zeros(0)
    a_all = np.concatenate(amplitudes) if amplitudes else np.zeros(0, dtype=np.complex128)
    refl = np.concatenate(flags) if flags else np.zeros(0, dtype=bool)

    # Two-way power loss 10**(-2*alpha*z/10) is a field factor of 10**(-alpha*z/10).
    a_all = a_all * 10.0 ** (-spec.attenuation * (z_all / 1e3) / 10.0)

    num_taps = math.ceil(round_trip_delay(spec, spec.length) / sample_period) + 1
    delays = 2.0 * spec.group_index * z_all / SPEED_OF_LIGHT
    taps = _render_taps(delays, a_all, refl, sample_period, num_taps)

    merged = False
    if len(spec.reflectors) > 1:
        refl_delays = np.sort(delays[refl])
        separation = float(np.min(np.diff(refl_delays)))
        if sample_period > separation:
            merged = True
            logger.warning(
                "Sample period %.3g s exceeds the closest reflector separation %.3g s; "
                "peaks will merge",
                sample_period,
                separation,
            )

    return ImpulseResponse(
        taps=taps,
        sample_period=sample_period,
        epoch=0.0,
        group_index=spec.group_index,
        positions=z_all,
        amplitudes=a_all,
        is_reflector=refl,
        merged_reflectors=merged,
    )


@functools.lru_cache(maxsize=32)
def _lagged_series(p: Perturbation) -> tuple[FloatArray, FloatArray]:
    """Fiber temperature on a fine grid for a series read as air temperature.

    The grid runs ten time constants past the last air sample, after which
    the fiber is taken to have settled on the final air value.
    """
    assert p.lag_tau is not None
    step = min(p.series_dt, p.lag_tau) / 10.0
    span = p.series_dt * (len(p.series) - 1) + 10.0 * p.lag_tau
    grid = step * np.arange(math.ceil(span / step) + 1)
    air = np.interp(grid, p.series_dt * np.arange(len(p.series)), np.asarray(p.series))
    fiber = thermal_lag(TimeSeries(t0=0.0, dt=step, values=air, label="air"), p.lag_tau)
    return grid, fiber.values


def _temperature_at(p: Perturbation, t: float) -> float:
    if p.kind is PerturbationKind.TEMPERATURE_STEP:
        return p.delta_t if t >= p.onset else 0.0
    if p.lag_tau is not None:
        grid, values = _lagged_series(p)
        return float(np.interp(t, grid, values))
    grid = p.series_dt * np.arange(len(p.series))
    return float(np.interp(t, grid, np.asarray(p.series, dtype=np.float64)))


def apply_perturbations(
    base: ImpulseResponse,
    spec: FiberSpec,
    perturbations: Sequence[Perturbation],
    t: float,
    wavelength: float,
) -> ImpulseResponse:
    """Freeze the time-varying response at frame epoch ``t``.

    Each perturbation imposes a one-way phase phi(t) = 2*pi*dn(t)*extent/wl.
    Contributions beyond the section receive the round-trip phase 2*phi;
    contributions inside receive the share of it proportional to the
    perturbed length in front of them. Temperature perturbations also shift
    delays by the round-trip thermal delay change, shared the same way.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")

    phase = np.zeros(base.positions.shape[0])
    shift = np.zeros(base.positions.shape[0])
    for p in perturbations:
        share = np.clip((base.positions - p.start) / p.extent, 0.0, 1.0)
        if p.kind is PerturbationKind.ACOUSTIC_TONE:
            delta_n = p.index_amplitude * math.sin(2.0 * math.pi * p.frequency * t)
        else:
            delta_t = _temperature_at(p, t)
            delta_n = thermal_index_change(spec, delta_t)
            shift += share * 2.0 * thermal_delay_shift(spec, p.extent / 1e3, delta_t)
        phase += share * 2.0 * one_way_phase(delta_n, p.extent, wavelength)

    amplitudes = base.amplitudes * np.exp(1j * phase)
    delays = 2.0 * base.group_index * base.positions / SPEED_OF_LIGHT + shift
    taps = _render_taps(delays, amplitudes, base.is_reflector, base.sample_period, len(base))

    return ImpulseResponse(
        taps=taps,
        sample_period=base.sample_period,
        epoch=t,
        group_index=base.group_index,
        positions=base.positions,
        amplitudes=base.amplitudes,
        is_reflector=base.is_reflector,
        merged_reflectors=base.merged_reflectors,
    )


def thermal_lag(air_temp: TimeSeries, tau: float) -> TimeSeries:
    """First-order low-pass following T_f[k+1] = T_f[k] + dt/tau*(T_air[k] - T_f[k])."""
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    if air_temp.dt >= tau:
        raise ValueError("unstable discretization")

    alpha = air_temp.dt / tau
    b = np.array([0.0, alpha])
    a = np.array([1.0, alpha - 1.0])
    x = air_temp.values.astype(np.float64)
    zi = lfilter_zi(b, a) * x[0]
    y, _ = lfilter(b, a, x, zi=zi)
    return TimeSeries(
        t0=air_temp.t0,
        dt=air_temp.dt,
        values=np.asarray(y, dtype=np.float64),
        label=f"{air_temp.label}_fiber",
    )
