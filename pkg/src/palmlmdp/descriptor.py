"""Block-wise label histograms and Chi-square matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lmdp
from .errors import InputError, ParameterError
from .filter_bank import FilterBank
from .response_field import convolve_responses

DEFAULT_BLOCK_SIZE = 16

METHODS = ("lmdp", "lbp", "ldp", "eldp", "ldn", "lldp")
METHOD_IDS = {name: i for i, name in enumerate(METHODS)}


@dataclass(frozen=True)
class LabelMap:
    labels: np.ndarray
    method: str
    n_bins: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise InputError(f"label map must be 2-D, got shape {labels.shape}")
        if self.method not in METHOD_IDS:
            raise InputError(f"unknown method {self.method!r}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_bins):
            raise InputError(
                f"{self.method} labels must lie in 0..{self.n_bins - 1}, "
                f"got {labels.min()}..{labels.max()}"
            )
        object.__setattr__(self, "labels", labels.astype(np.int32, copy=False))

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]


@dataclass(frozen=True)
class Descriptor:
    method: str
    block_size: int
    n_blocks: int
    bins_per_block: int
    counts: np.ndarray
    identity: str = ""

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.uint32)
        if counts.ndim != 1 or counts.size != self.n_blocks * self.bins_per_block:
            raise InputError(
                f"descriptor length {counts.size} != {self.n_blocks} blocks x "
                f"{self.bins_per_block} bins"
            )
        object.__setattr__(self, "counts", counts)

    def blocks(self) -> np.ndarray:
        return self.counts.reshape(self.n_blocks, self.bins_per_block)

    def compatible_with(self, other: "Descriptor") -> bool:
        return (
            self.method == other.method
            and self.block_size == other.block_size
            and self.bins_per_block == other.bins_per_block
            and self.n_blocks == other.n_blocks
        )


def build_label_map(image, bank: FilterBank) -> LabelMap:
    """LMDP label for every pixel of ``image``."""
    stack = convolve_responses(image, bank)
    labels, _ = lmdp.analyze_map(stack.responses)
    return LabelMap(labels, "lmdp", lmdp.n_label_bins(bank.params.n_orientations))


def center_crop(labels: np.ndarray, block_size: int) -> np.ndarray:
    h, w = labels.shape
    ch, cw = (h // block_size) * block_size, (w // block_size) * block_size
    top, left = (h - ch) // 2, (w - cw) // 2
    return labels[top:top + ch, left:left + cw]


def block_histograms(label_map: LabelMap, block_size: int = DEFAULT_BLOCK_SIZE,
                     identity: str = "") -> Descriptor:
    """Concatenated per-block label histograms, blocks in row-major order.

    The map is centre-cropped to the largest multiple of ``block_size``
    in each dimension first.
    """
    if int(block_size) != block_size or block_size < 1:
        raise ParameterError(f"block size must be a positive integer, got {block_size!r}")
    if label_map.height < block_size or label_map.width < block_size:
        raise InputError(
            f"{label_map.width}x{label_map.height} map is smaller than one "
            f"{block_size}x{block_size} block"
        )
    cropped = center_crop(label_map.labels, block_size)
    nby, nbx = cropped.shape[0] // block_size, cropped.shape[1] // block_size
    bins = label_map.n_bins
    blocks = (
        cropped.reshape(nby, block_size, nbx, block_size)
        .transpose(0, 2, 1, 3)
        .reshape(nby * nbx, block_size * block_size)
    )
    offsets = (np.arange(nby * nbx, dtype=np.int64) * bins)[:, None]
    counts = np.bincount((blocks + offsets).ravel(), minlength=nby * nbx * bins)
    return Descriptor(
        method=label_map.method,
        block_size=block_size,
        n_blocks=nby * nbx,
        bins_per_block=bins,
        counts=counts.astype(np.uint32),
        identity=identity,
    )


def chi_square(a: Descriptor, b: Descriptor) -> float:
    """Sum of (a_i - b_i)^2 / (a_i + b_i); empty bins contribute nothing."""
    if not a.compatible_with(b):
        raise InputError(
            f"cannot compare {a.method}/p={a.block_size}/{a.counts.size} with "
            f"{b.method}/p={b.block_size}/{b.counts.size}"
        )
    return chi_square_counts(a.counts, b.counts)


def chi_square_counts(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch {a.shape} vs {b.shape}")
    total = a + b
    nz = total > 0
    diff = a[nz] - b[nz]
    return float(np.sum(diff * diff / total[nz]))
