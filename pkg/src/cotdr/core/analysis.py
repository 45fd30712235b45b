"""Monitoring observables derived from a stream of correlation traces.

Series extraction is a per-frame map in frame order. Frames where an
observable cannot be measured are flagged in the series' gap mask and are
never interpolated into the stored values.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy import optimize, signal
from scipy.constants import c as SPEED_OF_LIGHT

from cotdr.core.correlator import diff_phase, subsample_fit
from cotdr.core.fibermodel import thermal_lag
from cotdr.models.enums import FitMethod
from cotdr.models.signals import BoolArray, CorrTrace, FloatArray, TimeSeries, ToneResult

logger = logging.getLogger(__name__)


def bin_of_position(position: float, sample_period: float, group_index: float) -> int:
    """Trace bin nearest to the round trip to ``position`` meters."""
    return int(round(2.0 * group_index * position / SPEED_OF_LIGHT / sample_period))


def snap_to_bright(power: FloatArray, bin: int, radius: int) -> int:
    """Strongest bin of ``power`` within ``radius`` of ``bin``."""
    lo = max(bin - radius, 0)
    hi = min(bin + radius + 1, power.shape[0])
    if lo >= hi:
        raise ValueError(f"bin {bin} outside the trace [0, {power.shape[0]})")
    return lo + int(np.argmax(power[lo:hi]))


def _timing(traces: Sequence[CorrTrace], dt: float | None) -> tuple[float, float]:
    if not traces:
        raise ValueError("no traces")
    if dt is None:
        dt = traces[1].epoch - traces[0].epoch if len(traces) > 1 else 1.0
    return traces[0].epoch, dt


def _series(
    t0: float, dt: float, values: FloatArray, gaps: BoolArray, label: str
) -> TimeSeries:
    count = int(np.count_nonzero(gaps))
    if count:
        logger.warning("Series '%s' has %d gap frame(s) of %d", label, count, gaps.shape[0])
    values = np.where(gaps, 0.0, values)
    return TimeSeries(t0=t0, dt=dt, values=values, label=label, gaps=gaps if count else None)


def _locate(
    trace: CorrTrace, bin: int, radius: int, min_power: float
) -> int | None:
    """Peak bin near ``bin``, or None when the peak is missing in this frame."""
    power = np.abs(trace.values) ** 2
    lo = max(bin - radius, 0)
    hi = min(bin + radius + 1, len(trace))
    best = lo + int(np.argmax(power[lo:hi]))
    on_edge = (best == lo and lo > 0) or (best == hi - 1 and hi < len(trace))
    if on_edge or power[best] <= min_power:
        return None
    return best


def rtt_series(
    traces: Sequence[CorrTrace],
    input_bin: int,
    output_bin: int,
    *,
    search_radius: int = 2,
    threshold_db: float = 20.0,
    fit: FitMethod = FitMethod.PARABOLA,
    dt: float | None = None,
    label: str = "rtt",
) -> TimeSeries:
    """Refined delay of the output peak minus that of the input peak, per frame.

    A frame is a gap when either peak is not a local maximum inside its
    search window or does not clear the trace median by ``threshold_db``.
    """
    t0, dt = _timing(traces, dt)
    values = np.zeros(len(traces))
    gaps = np.zeros(len(traces), dtype=bool)
    factor = 10.0 ** (threshold_db / 10.0)
    for i, trace in enumerate(traces):
        min_power = float(np.median(np.abs(trace.values) ** 2)) * factor
        a = _locate(trace, input_bin, search_radius, min_power)
        b = _locate(trace, output_bin, search_radius, min_power)
        if a is None or b is None:
            gaps[i] = True
            continue
        values[i] = subsample_fit(trace, b, fit).delay - subsample_fit(trace, a, fit).delay
    return _series(t0, dt, values, gaps, label)


def amplitude_series(
    traces: Sequence[CorrTrace], bin: int, *, dt: float | None = None, label: str = "amplitude"
) -> TimeSeries:
    """Backscattered power |values[bin]|**2 per frame."""
    t0, dt = _timing(traces, dt)
    values = np.array([abs(t.values[bin]) ** 2 for t in traces], dtype=np.float64)
    return TimeSeries(t0=t0, dt=dt, values=values, label=label)


def phase_series(
    traces: Sequence[CorrTrace],
    bin_a: int,
    bin_b: int,
    *,
    dropout_db: float = 20.0,
    dt: float | None = None,
    label: str = "phase",
) -> TimeSeries:
    """Unwrapped differential phase between two bins, per frame.

    A frame drops out when either bin fades more than ``dropout_db`` below
    its median power over the stream, or vanishes.
    """
    t0, dt = _timing(traces, dt)
    power_a = np.array([abs(t.values[bin_a]) ** 2 for t in traces])
    power_b = np.array([abs(t.values[bin_b]) ** 2 for t in traces])
    factor = 10.0 ** (-dropout_db / 10.0)
    gaps = (
        (power_a <= np.median(power_a) * factor)
        | (power_b <= np.median(power_b) * factor)
        | (power_a == 0.0)
        | (power_b == 0.0)
    )
    values = np.zeros(len(traces))
    for i, trace in enumerate(traces):
        if not gaps[i]:
            values[i] = diff_phase(trace, bin_a, bin_b)
    return unwrap(_series(t0, dt, values, gaps, label))


def unwrap(series: TimeSeries) -> TimeSeries:
    """Add multiples of 2*pi so successive valid samples differ by at most pi.

    A step of exactly +-pi is kept as given. Gaps are skipped.
    """
    values = series.values.copy()
    valid = series.valid
    values[valid] = np.unwrap(series.values[valid])
    return TimeSeries(
        t0=series.t0, dt=series.dt, values=values, label=series.label, gaps=series.gaps
    )


def _filled(series: TimeSeries) -> FloatArray:
    """Series values with gaps linearly interpolated, for spectral work only."""
    if series.gaps is None:
        return series.values
    valid = series.valid
    if not np.any(valid):
        raise ValueError(f"series '{series.label}' has no valid samples")
    idx = np.arange(len(series))
    return np.interp(idx, idx[valid], series.values[valid])


def tone_detect(
    series: TimeSeries, f_min: float, f_max: float, min_snr_db: float = 10.0
) -> ToneResult:
    """Strongest spectral line of ``series`` inside [f_min, f_max].

    The series is linearly detrended; the frequency and amplitude come from
    a 3-point parabola through the periodogram maximum, pp from the series
    band-passed to the search band. ``snr_db`` compares the line with the
    median periodogram level.
    """
    if f_min <= 0 or f_max < f_min:
        raise ValueError(f"invalid band [{f_min}, {f_max}] Hz")
    fs = 1.0 / series.dt
    n = len(series)
    if n * series.dt < 2.0 / f_min:
        raise ValueError(
            f"series too short: {n * series.dt:.4g} s holds fewer than 2 periods of {f_min} Hz"
        )

    x = signal.detrend(_filled(series), type="linear")
    freqs, power = signal.periodogram(x, fs=fs, window="boxcar", detrend=False, scaling="spectrum")
    band = np.flatnonzero((freqs >= f_min) & (freqs <= f_max))
    if band.size == 0:
        raise ValueError(f"no periodogram bins in [{f_min}, {f_max}] Hz")

    k = int(band[np.argmax(power[band])])
    offset, peak = 0.0, float(power[k])
    if 0 < k < power.shape[0] - 1:
        p_m, p_0, p_p = power[k - 1 : k + 2]
        denom = p_m - 2.0 * p_0 + p_p
        if denom < 0:
            offset = float(np.clip(0.5 * (p_m - p_p) / denom, -0.5, 0.5))
            peak = float(p_0 - 0.25 * (p_m - p_p) * offset)
    frequency = float(freqs[k] + offset * (freqs[1] - freqs[0]))

    spectrum = np.fft.rfft(x)
    bins = np.fft.rfftfreq(n, d=series.dt)
    keep = (bins >= f_min) & (bins <= f_max)
    banded = np.fft.irfft(np.where(keep, spectrum, 0.0), n=n)

    noise = float(np.median(power[1:])) if power.shape[0] > 1 else 0.0
    snr_db = 10.0 * math.log10(peak / max(noise, np.finfo(float).tiny)) if peak > 0 else -math.inf
    return ToneResult(
        frequency=frequency,
        amplitude=math.sqrt(2.0 * max(peak, 0.0)),
        pp=float(banded.max() - banded.min()),
        snr_db=snr_db,
        detected=snr_db >= min_snr_db,
    )


def temp_estimate(rtt: TimeSeries, fiber_km: float, thermal_coeff: float = 35.0) -> TimeSeries:
    """Relative fiber temperature from round-trip delay changes.

    thermal_coeff is one-way in ps/(K*km), hence doubled for the round trip.
    The first valid sample is the reference.
    """
    if fiber_km <= 0:
        raise ValueError(f"fiber_km must be > 0, got {fiber_km}")
    valid = rtt.valid
    if not np.any(valid):
        raise ValueError(f"series '{rtt.label}' has no valid samples")
    reference = rtt.values[int(np.argmax(valid))]
    kelvin = (rtt.values - reference) / (2.0 * thermal_coeff * 1e-12 * fiber_km)
    return TimeSeries(
        t0=rtt.t0,
        dt=rtt.dt,
        values=np.where(valid, kelvin, 0.0),
        label=f"{rtt.label}_temp",
        gaps=rtt.gaps,
    )


def predicted_rtt_shift(
    air_temp: TimeSeries, tau: float, fiber_km: float, thermal_coeff: float = 35.0
) -> TimeSeries:
    """Round-trip delay change of a fiber lagging the air temperature by ``tau``."""
    fiber_temp = thermal_lag(air_temp, tau)
    shift = 2.0 * thermal_coeff * 1e-12 * fiber_km * (fiber_temp.values - fiber_temp.values[0])
    return TimeSeries(t0=air_temp.t0, dt=air_temp.dt, values=shift, label="rtt_shift")


def fit_thermal_lag(
    air_temp: TimeSeries, rtt: TimeSeries, fiber_km: float, thermal_coeff: float = 35.0
) -> float:
    """Least-squares estimate of the heating/cooling time constant in seconds."""
    if len(air_temp) != len(rtt) or not math.isclose(air_temp.dt, rtt.dt, rel_tol=1e-9):
        raise ValueError("air temperature and RTT series are not on the same time grid")
    valid = rtt.valid
    measured = rtt.values - rtt.values[int(np.argmax(valid))]

    def cost(log_tau: float) -> float:
        predicted = predicted_rtt_shift(air_temp, math.exp(log_tau), fiber_km, thermal_coeff)
        residual = measured[valid] - predicted.values[valid]
        return float(np.sum(residual**2))

    lo = math.log(air_temp.dt * 1.01)
    hi = math.log(air_temp.dt * len(air_temp) * 10.0)
    result = optimize.minimize_scalar(cost, bounds=(lo, hi), method="bounded")
    return float(math.exp(result.x))
