"""Local multiple directional pattern coding.

A response vector ``r_1..r_n`` (circular, index 1 adjacent to n) becomes
a bit string with ``b_j = 1`` iff ``r_j < r_{j-1}``. Each circular "01"
boundary, read as ``b_j = 1, b_{j+1} = 0``, marks a circular local
minimum of the responses: one dominant direction (a "DP"). Per pixel we
report how many there are (DPN), where they are (DPI), how much of the
circle each one dominates (DPL), and a single integer label.

Indices in this module are 1-based to match the orientation numbering of
:mod:`palmlmdp.filter_bank`. Bit sequences are stored ``b_1..b_n``;
:func:`format_bits` prints them with ``b_n`` leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError


def n_max_label(n_orientations: int) -> int:
    """Label shared by every pixel with three or more dominant directions."""
    return n_orientations * n_orientations + n_orientations - 1


def n_label_bins(n_orientations: int) -> int:
    """Histogram size: labels 0..N_m (0 is the flat, no-direction label)."""
    return n_max_label(n_orientations) + 1


@dataclass(frozen=True)
class BitPattern:
    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 2 or any(b not in (0, 1) for b in bits):
            raise InputError(f"bit pattern must hold >= 2 zero/one values, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @property
    def n_orientations(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, j):
        return self.bits[j]

    def __str__(self):
        return format_bits(self.bits)


@dataclass(frozen=True)
class DirectionPatternInfo:
    dpi: int
    dpl: int
    response: float


@dataclass(frozen=True)
class DirectionAnalysis:
    bits: BitPattern
    dpn: int
    dps: tuple
    label: int

    @property
    def dpis(self) -> tuple:
        return tuple(dp.dpi for dp in self.dps)


def _bits(bits) -> tuple:
    if isinstance(bits, BitPattern):
        return bits.bits
    return BitPattern(tuple(bits)).bits


def format_bits(bits) -> str:
    """Display form, highest index first (``b_n ... b_1``)."""
    return "".join(str(b) for b in reversed(_bits(bits)))


def parse_bits(text: str) -> BitPattern:
    """Inverse of :func:`format_bits`."""
    return BitPattern(tuple(int(c) for c in reversed(text.strip())))


def _clockwise(j: int, n: int) -> int:
    """phi(j): the neighbour compared against; phi(1) = n."""
    return n if j == 1 else j - 1


def _counter_clockwise(j: int, n: int) -> int:
    return 1 if j == n else j + 1


def _check_responses(responses) -> np.ndarray:
    r = np.asarray(responses, dtype=np.float64)
    if r.ndim != 1 or r.size < 2:
        raise InputError(f"responses must be a vector of length >= 2, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise InputError("responses contain non-finite values")
    return r


def encode_bits(responses: Sequence[float]) -> BitPattern:
    r = _check_responses(responses)
    n = r.size
    bits = tuple(
        1 if r[j - 1] - r[_clockwise(j, n) - 1] < 0 else 0 for j in range(1, n + 1)
    )
    return BitPattern(bits)


def lmdp_integer(bits) -> int:
    """Weighted sum ``sum_j b_j * 2**j`` with j starting at 1."""
    return sum(b << j for j, b in enumerate(_bits(bits), start=1))


def dpn(bits) -> int:
    """Number of dominant directions: half the count of circular bit changes."""
    b = _bits(bits)
    n = len(b)
    changes = sum(abs(b[j - 1] - b[_clockwise(j, n) - 1]) for j in range(1, n + 1))
    return changes // 2


def dpi_set(bits) -> tuple:
    """Sorted 1-based positions j with ``b_j = 1`` and ``b_{j+1} = 0``."""
    b = _bits(bits)
    n = len(b)
    return tuple(
        j for j in range(1, n + 1) if b[j - 1] - b[_counter_clockwise(j, n) - 1] == 1
    )


def dpl(bits, dpi: int) -> int:
    """Run of 1s ending at ``dpi`` plus the run of 0s right after it."""
    b = _bits(bits)
    n = len(b)
    if dpi not in dpi_set(b):
        raise InputError(f"{dpi} is not a direction-pattern position of {format_bits(b)}")
    ones = 0
    j = dpi
    while b[j - 1] == 1 and ones < n:
        ones += 1
        j = _clockwise(j, n)
    zeros = 0
    j = _counter_clockwise(dpi, n)
    while b[j - 1] == 0 and zeros < n:
        zeros += 1
        j = _counter_clockwise(j, n)
    return ones + zeros


def sort_dps(dps: Sequence[DirectionPatternInfo]) -> tuple:
    """Confidence order: longer DPL, then smaller response, then smaller index."""
    return tuple(sorted(dps, key=lambda d: (-d.dpl, d.response, d.dpi)))


def lmdp_label(dps: Sequence[DirectionPatternInfo], n_orientations: int) -> int:
    """Single label for a pixel from its confidence-sorted DPs.

    0 for no direction, the DPI itself for one, ``DPI_1 * n + DPI_2`` for
    two, and ``n*n + n - 1`` for three or more.
    """
    count = len(dps)
    if count == 0:
        return 0
    if count == 1:
        return dps[0].dpi
    if count == 2:
        return dps[0].dpi * n_orientations + dps[1].dpi
    return n_max_label(n_orientations)


def analyze_point(responses: Sequence[float]) -> DirectionAnalysis:
    r = _check_responses(responses)
    bits = encode_bits(r)
    positions = dpi_set(bits)
    dps = sort_dps(
        DirectionPatternInfo(dpi=j, dpl=dpl(bits, j), response=float(r[j - 1]))
        for j in positions
    )
    count = dpn(bits)
    if count != len(dps):
        raise AssertionError(f"DPN {count} disagrees with {len(dps)} DP positions")
    return DirectionAnalysis(bits=bits, dpn=count, dps=dps, label=lmdp_label(dps, r.size))


def analyze_map(responses: np.ndarray) -> tuple:
    """Vectorised :func:`analyze_point` over ``responses[j - 1, ...]``.

    Returns ``(labels, dpn)`` integer arrays with the trailing shape of
    ``responses``.
    """
    r = np.asarray(responses, dtype=np.float64)
    if r.ndim < 2 or r.shape[0] < 2:
        raise InputError(f"expected (n_orientations, ...) responses, got shape {r.shape}")
    n = r.shape[0]
    bits = r < np.roll(r, 1, axis=0)
    is_dp = bits & ~np.roll(bits, -1, axis=0)
    count = is_dp.sum(axis=0)

    # ones_back[j]: 1s at j, j-1, ...; zeros_fwd[j]: 0s at j, j+1, ...
    ones_back = np.zeros(r.shape, dtype=np.int16)
    zeros_fwd = np.zeros(r.shape, dtype=np.int16)
    for _ in range(n):
        ones_back = np.where(bits, np.roll(ones_back, 1, axis=0) + 1, 0)
        zeros_fwd = np.where(bits, 0, np.roll(zeros_fwd, -1, axis=0) + 1)
    lengths = ones_back + np.roll(zeros_fwd, -1, axis=0)

    first = np.argmax(is_dp, axis=0)
    last = n - 1 - np.argmax(is_dp[::-1], axis=0)
    len_first = np.take_along_axis(lengths, first[None], axis=0)[0]
    len_last = np.take_along_axis(lengths, last[None], axis=0)[0]
    r_first = np.take_along_axis(r, first[None], axis=0)[0]
    r_last = np.take_along_axis(r, last[None], axis=0)[0]
    # first < last by construction, so index ties already favour `first`
    last_wins = (len_last > len_first) | ((len_last == len_first) & (r_last < r_first))
    primary = np.where(last_wins, last, first) + 1
    secondary = np.where(last_wins, first, last) + 1

    labels = np.zeros(count.shape, dtype=np.int32)
    labels = np.where(count == 1, first + 1, labels)
    labels = np.where(count == 2, primary * n + secondary, labels)
    labels = np.where(count >= 3, n_max_label(n), labels)
    return labels.astype(np.int32), count.astype(np.int32)
