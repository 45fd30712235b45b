"""PRBS probe generation and baseband modulation."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from scipy.constants import c as SPEED_OF_LIGHT

from cotdr.models.enums import Modulation
from cotdr.models.signals import Waveform
from cotdr.models.specs import ProbeSpec

BitArray = npt.NDArray[np.uint8]

# Maximal-length Fibonacci feedback taps (1-based register stages).
PRBS_TAPS: dict[int, tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
}


def gen_prbs(order: int, seed: Sequence[int] | None = None) -> BitArray:
    """Return one full period (2**order - 1 bits) of the maximal-length sequence.

    The register is loaded with ``seed`` (all ones when omitted); each step
    emits the last stage and shifts in the XOR of the tapped stages.
    """
    taps = PRBS_TAPS.get(order)
    if taps is None:
        raise ValueError(
            f"no feedback polynomial for PRBS order {order} "
            f"(supported: {min(PRBS_TAPS)}-{max(PRBS_TAPS)})"
        )

    register = [1] * order if seed is None else [int(b) & 1 for b in seed]
    if len(register) != order:
        raise ValueError(f"seed length {len(register)} does not match order {order}")
    if not any(register):
        raise ValueError("degenerate LFSR seed")

    period = 2**order - 1
    out = np.empty(period, dtype=np.uint8)
    for i in range(period):
        out[i] = register[-1]
        feedback = 0
        for tap in taps:
            feedback ^= register[tap - 1]
        register = [feedback, *register[:-1]]
    return out


def _is_mersenne_length(n: int) -> bool:
    return n >= 3 and (n + 1) & n == 0


def extend_prbs(seq: npt.ArrayLike) -> BitArray:
    """Pad a maximal-length sequence to a power-of-two length.

    One zero is inserted immediately after the longest run of zeros, found
    cyclically, so the sequence keeps its balance of ones.
    """
    bits = np.asarray(seq, dtype=np.uint8)
    n = int(bits.shape[0])
    if not _is_mersenne_length(n):
        raise ValueError(f"sequence length {n} is not of the form 2^k - 1")

    # Rotate so the scan starts on a one; runs of zeros then never wrap.
    ones = np.flatnonzero(bits)
    if ones.size == 0:
        raise ValueError("sequence holds no ones")
    shift = int(ones[0])
    rotated = np.roll(bits, -shift)

    best_start, best_len = 0, 0
    run_start, run_len = 0, 0
    for i, b in enumerate(rotated):
        if b == 0:
            if run_len == 0:
                run_start = i
            run_len += 1
            if run_len > best_len:
                best_start, best_len = run_start, run_len
        else:
            run_len = 0

    insert_at = (best_start + best_len + shift) % n
    if insert_at == 0:
        insert_at = n
    return np.insert(bits, insert_at, 0).astype(np.uint8)


def probe_bits(spec: ProbeSpec) -> BitArray:
    """Bit sequence transmitted by ``spec``."""
    bits = gen_prbs(spec.prbs_order, spec.seed)
    return extend_prbs(bits) if spec.extended else bits


def modulate(bits: npt.ArrayLike, spec: ProbeSpec) -> Waveform:
    """Map bits to rectangular NRZ samples: OOK {0,1}, BPSK {-1,+1}."""
    b = np.asarray(bits, dtype=np.float64)
    if b.size == 0:
        raise ValueError("empty bit sequence")
    if spec.samples_per_bit < 1:
        raise ValueError("samples_per_bit must be >= 1")

    symbols = b if spec.modulation is Modulation.OOK else 2.0 * b - 1.0
    return Waveform(
        samples=np.repeat(symbols, spec.samples_per_bit),
        sample_rate=spec.sample_rate,
    )


def probe_waveform(spec: ProbeSpec) -> Waveform:
    """Modulated probe for ``spec``."""
    return modulate(probe_bits(spec), spec)


def spatial_resolution(spec: ProbeSpec, group_index: float) -> float:
    """Two-way spatial resolution in meters: the fiber length of one bit."""
    return SPEED_OF_LIGHT / (2.0 * group_index * spec.bit_rate)


def unambiguous_range(spec: ProbeSpec, group_index: float) -> float:
    """Fiber length whose round trip equals one sequence duration."""
    return SPEED_OF_LIGHT * spec.sequence_duration / (2.0 * group_index)
