"""Trace archive (COTD) and CSV outputs.

COTD layout, little-endian: magic ``b"COTD"``, u16 version, u8 flags
(bit 0: complex payload), f64 sample rate in Hz, u32 frame length, u32 frame
count, then one payload per frame as float32 (I and Q interleaved when
complex).
"""

from __future__ import annotations

import struct
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from cotdr.models.signals import ComplexArray, CorrTrace, FbgSweepResult, Fingerprint, TimeSeries

MAGIC = b"COTD"
VERSION = 1
FLAG_COMPLEX = 0x01
_HEADER = struct.Struct("<4sHBdII")


@dataclass(frozen=True, slots=True, eq=False)
class TraceArchive:
    """Decoded archive: one row of ``values`` per frame."""

    sample_rate: float
    is_complex: bool
    values: ComplexArray

    @property
    def frame_count(self) -> int:
        return int(self.values.shape[0])

    @property
    def frame_length(self) -> int:
        return int(self.values.shape[1])

    def traces(self, frame_rate: float) -> list[CorrTrace]:
        """Traces with epochs ``i / frame_rate``."""
        return [
            CorrTrace(values=row, sample_period=1.0 / self.sample_rate, epoch=i / frame_rate)
            for i, row in enumerate(self.values)
        ]


def _payload(traces: Sequence[CorrTrace], is_complex: bool) -> np.ndarray:
    stack = np.stack([t.values for t in traces])
    if is_complex:
        return stack.astype("<c8")
    return stack.real.astype("<f4")


def to_float32(traces: Sequence[CorrTrace], is_complex: bool) -> list[CorrTrace]:
    """Traces rounded exactly as the archive stores them."""
    payload = _payload(traces, is_complex).astype(np.complex128)
    return [
        CorrTrace(
            values=row,
            sample_period=t.sample_period,
            epoch=t.epoch,
            num_averaged=t.num_averaged,
        )
        for row, t in zip(payload, traces)
    ]


def write_archive(path: Path, traces: Sequence[CorrTrace], is_complex: bool) -> None:
    if not traces:
        raise ValueError("no traces to archive")
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"traces have differing lengths {sorted(lengths)}")
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        FLAG_COMPLEX if is_complex else 0,
        1.0 / traces[0].sample_period,
        lengths.pop(),
        len(traces),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(_payload(traces, is_complex).tobytes())


def read_archive(path: Path) -> TraceArchive:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, flags, sample_rate, frame_len, frame_count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a COTD archive")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported COTD version {version}")

    is_complex = bool(flags & FLAG_COMPLEX)
    width = 8 if is_complex else 4
    expected = _HEADER.size + frame_count * frame_len * width
    if len(data) != expected:
        raise ValueError(f"{path}: payload holds {len(data)} bytes, header implies {expected}")

    dtype = "<c8" if is_complex else "<f4"
    raw = np.frombuffer(data, dtype=dtype, offset=_HEADER.size)
    values = raw.astype(np.complex128).reshape(frame_count, frame_len)
    return TraceArchive(sample_rate=sample_rate, is_complex=is_complex, values=values)


def _write_frame(df: pd.DataFrame, path: Path, float_format: str) -> None:
    df.to_csv(path, index=False, float_format=float_format, lineterminator="\n")


def write_series_csv(path: Path, series: TimeSeries, float_format: str = "%.9e") -> None:
    """``t_seconds,value,label`` per frame; gap frames leave ``value`` empty."""
    values = np.where(series.valid, series.values, np.nan)
    df = pd.DataFrame({"t_seconds": series.times, "value": values, "label": series.label})
    _write_frame(df, path, float_format)


def read_series_csv(path: Path) -> TimeSeries:
    df = pd.read_csv(path)
    if list(df.columns) != ["t_seconds", "value", "label"]:
        raise ValueError(f"{path}: unexpected columns {list(df.columns)}")
    if len(df) < 1:
        raise ValueError(f"{path}: empty series")
    times = df["t_seconds"].to_numpy(dtype=np.float64)
    gaps = df["value"].isna().to_numpy()
    dt = float(times[1] - times[0]) if len(times) > 1 else 1.0
    return TimeSeries(
        t0=float(times[0]),
        dt=dt,
        values=df["value"].fillna(0.0).to_numpy(dtype=np.float64),
        label=str(df["label"].iloc[0]),
        gaps=gaps if gaps.any() else None,
    )


def write_fingerprint_csv(path: Path, fp: Fingerprint, float_format: str = "%.9e") -> None:
    df = pd.DataFrame({"distance_m": fp.distance, "delay_seconds": fp.delay, "power": fp.power})
    _write_frame(df, path, float_format)


def write_spectra_csv(path: Path, result: FbgSweepResult, float_format: str = "%.9e") -> None:
    """Long table ``grating,position_m,wavelength_m,reflectivity``."""
    gratings, steps = result.spectra.shape
    df = pd.DataFrame(
        {
            "grating": np.repeat(np.arange(gratings), steps),
            "position_m": np.repeat(result.positions, steps),
            "wavelength_m": np.tile(result.wavelengths, gratings),
            "reflectivity": result.spectra.reshape(-1),
        }
    )
    _write_frame(df, path, float_format)
