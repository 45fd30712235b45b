"""Receiver front end: channel convolution, detection, noise and ADC."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from cotdr.models.enums import DetectionMode
from cotdr.models.signals import ComplexArray, FloatArray, ImpulseResponse, Waveform
from cotdr.models.specs import DetectionConfig

Seed = int | np.random.SeedSequence

# Relative tolerance when comparing probe and response sample rates.
_RATE_RTOL = 1e-9


def propagate(probe: Waveform, h: ImpulseResponse, frame_length: int) -> ComplexArray:
    """Convolve the probe field with the response taps, zero-padded to ``frame_length``."""
    if not math.isclose(probe.sample_rate, h.sample_rate, rel_tol=_RATE_RTOL):
        raise ValueError(
            f"probe sample rate {probe.sample_rate} Hz differs from response "
            f"sample rate {h.sample_rate} Hz"
        )
    field = fftconvolve(probe.samples.astype(np.complex128), h.taps)
    if field.shape[0] > frame_length:
        raise ValueError(
            f"frame_period too short: echo needs {field.shape[0]} samples, "
            f"frame holds {frame_length}"
        )
    out = np.zeros(frame_length, dtype=np.complex128)
    out[: field.shape[0]] = field
    return out


def detect_direct(field: ComplexArray, cfg: DetectionConfig, noise_seed: Seed) -> FloatArray:
    """Square-law photodiode output plus white Gaussian noise."""
    power = np.abs(field) ** 2
    if cfg.thermal_noise_sigma == 0.0:
        return power
    rng = np.random.default_rng(noise_seed)
    return power + rng.normal(0.0, cfg.thermal_noise_sigma, power.shape[0])


def wiener_phase(
    count: int, linewidth: float, sample_period: float, rng: np.random.Generator
) -> FloatArray:
    """Random-walk laser phase with increment variance 2*pi*linewidth*dt."""
    if linewidth == 0.0:
        return np.zeros(count)
    steps = rng.normal(0.0, math.sqrt(2.0 * math.pi * linewidth * sample_period), count)
    return np.cumsum(steps)


def detect_coherent(
    field: ComplexArray,
    cfg: DetectionConfig,
    noise_seed: Seed,
    sample_period: float = 1.0,
) -> ComplexArray:
    """I/Q output of a self-homodyne receiver.

    The received field is mixed with a local oscillator cut from the same
    laser: the residual phase is a Wiener process starting at a random
    per-frame offset when the laser has a linewidth. Noise has standard
    deviation ``thermal_noise_sigma`` on I and on Q.
    """
    rng = np.random.default_rng(noise_seed)
    out = math.sqrt(cfg.lo_power_gain) * field
    if cfg.lo_linewidth > 0.0:
        theta = rng.uniform(0.0, 2.0 * math.pi) + wiener_phase(
            field.shape[0], cfg.lo_linewidth, sample_period, rng
        )
        out = out * np.exp(-1j * theta)
    if cfg.thermal_noise_sigma > 0.0:
        sigma = cfg.thermal_noise_sigma
        out = out + rng.normal(0.0, sigma, field.shape[0]) + 1j * rng.normal(
            0.0, sigma, field.shape[0]
        )
    return out


def _quantize_real(x: FloatArray, cfg: DetectionConfig, midpoint: float) -> FloatArray:
    assert cfg.adc_bits is not None
    if cfg.adc_bits == 1:
        return np.where(x >= midpoint, 1.0, -1.0)
    step = 2.0 * cfg.adc_full_scale / 2**cfg.adc_bits
    top = cfg.adc_full_scale - step / 2.0
    return np.clip((np.floor(x / step) + 0.5) * step, -top, top)


def adc(samples: FloatArray | ComplexArray, cfg: DetectionConfig) -> FloatArray | ComplexArray:
    """Quantize detected samples.

    One bit slices against the signal midpoint (the mean for unipolar direct
    detection, 0 for bipolar I/Q); more bits use a uniform mid-rise quantizer
    over [-adc_full_scale, +adc_full_scale]. I and Q are quantized separately.
    """
    if cfg.adc_bits is None:
        return samples
    if cfg.adc_full_scale == 0.0:
        raise ValueError("ADC full-scale range is 0")
    if np.iscomplexobj(samples):
        return _quantize_real(samples.real, cfg, 0.0) + 1j * _quantize_real(
            samples.imag, cfg, 0.0
        )
    midpoint = float(np.mean(samples)) if cfg.mode is DetectionMode.DIRECT else 0.0
    return _quantize_real(np.asarray(samples, dtype=np.float64), cfg, midpoint)
