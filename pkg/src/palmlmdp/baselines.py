"""Reference texture codes: LBP riu2, Kirsch-based LDP/ELDP/LDN, Gabor LLDP.

Every function that produces a :class:`~palmlmdp.descriptor.LabelMap`
feeds the same block histogram and Chi-square path as LMDP.

Compass and neighbour order throughout is counter-clockwise starting at
east: E, NE, N, NW, W, SW, S, SE (rows grow downward, so "N" is the row
above). All ties resolve toward the smaller index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .descriptor import LabelMap
from .errors import InputError, ParameterError
from .filter_bank import FilterBank
from .response_field import PAD_MODE, GrayImage, convolve_responses

# (row, col) of each ring position inside a 3x3 window, CCW from east.
RING = ((1, 2), (0, 2), (0, 1), (0, 0), (1, 0), (2, 0), (2, 1), (2, 2))

_EAST_RING = (5, 5, -3, -3, -3, -3, -3, 5)

LBP_BINS = 10
LDP_BINS = 256
ELDP_BINS = 64
LDN_BINS = 64
DEFAULT_LDP_K = 3


def _kirsch_masks() -> np.ndarray:
    masks = np.zeros((8, 3, 3))
    for k in range(8):
        for i, (r, c) in enumerate(RING):
            masks[k, r, c] = _EAST_RING[(i - k) % 8]
    masks.setflags(write=False)
    return masks


KIRSCH_MASKS = _kirsch_masks()


@dataclass(frozen=True)
class KirschResponses:
    planes: np.ndarray  # (8, height, width)

    @property
    def height(self):
        return self.planes.shape[1]

    @property
    def width(self):
        return self.planes.shape[2]


def _pixels(image) -> np.ndarray:
    img = image if isinstance(image, GrayImage) else GrayImage(image)
    if img.height < 3 or img.width < 3:
        raise InputError(f"image must be at least 3x3, got {img.width}x{img.height}")
    return img.pixels


def lbp_riu2_code(center: float, neighbours) -> int:
    """riu2 label of one 8-neighbourhood given in ring order."""
    bits = [1 if g - center >= 0 else 0 for g in neighbours]
    transitions = sum(bits[p] != bits[p - 1] for p in range(len(bits)))
    return sum(bits) if transitions <= 2 else len(bits) + 1


def lbp_riu2(image) -> LabelMap:
    """Rotation-invariant uniform LBP (P=8, R=1) on the square neighbourhood."""
    px = _pixels(image)
    padded = np.pad(px, 1, mode="reflect")
    h, w = px.shape
    bits = np.stack([
        padded[r:r + h, c:c + w] >= px for r, c in RING
    ]).astype(np.int8)
    transitions = np.sum(bits != np.roll(bits, 1, axis=0), axis=0)
    ones = bits.sum(axis=0)
    labels = np.where(transitions <= 2, ones, 9)
    return LabelMap(labels, "lbp", LBP_BINS)


def kirsch_responses(image) -> KirschResponses:
    px = _pixels(image)
    planes = np.stack([ndimage.correlate(px, m, mode=PAD_MODE) for m in KIRSCH_MASKS])
    return KirschResponses(planes)


def _check_eight(responses) -> np.ndarray:
    r = np.asarray(responses, dtype=np.float64)
    if r.shape != (8,) or not np.all(np.isfinite(r)):
        raise InputError(f"expected 8 finite responses, got {responses!r}")
    return r


def _check_k(k):
    if int(k) != k or not 1 <= k <= 7:
        raise ParameterError(f"LDP k must be in 1..7, got {k!r}")


def ldp_code(responses, k: int = DEFAULT_LDP_K) -> int:
    _check_k(k)
    r = _check_eight(responses)
    top = np.argsort(-r, kind="stable")[:k]
    return int(sum(1 << int(i) for i in top))


def eldp_code(responses) -> int:
    r = _check_eight(responses)
    order = np.argsort(-r, kind="stable")
    return int(order[0]) * 8 + int(order[1])


def ldn_code(responses) -> int:
    r = _check_eight(responses)
    return int(np.argmax(r)) * 8 + int(np.argmin(r))


def _descending(planes: np.ndarray) -> np.ndarray:
    return np.argsort(-planes, axis=0, kind="stable")


def ldp(image, k: int = DEFAULT_LDP_K) -> LabelMap:
    _check_k(k)
    order = _descending(kirsch_responses(image).planes)[:k]
    labels = np.sum(np.left_shift(1, order), axis=0)
    return LabelMap(labels, "ldp", LDP_BINS)


def eldp(image) -> LabelMap:
    order = _descending(kirsch_responses(image).planes)
    return LabelMap(order[0] * 8 + order[1], "eldp", ELDP_BINS)


def ldn(image) -> LabelMap:
    planes = kirsch_responses(image).planes
    labels = np.argmax(planes, axis=0) * 8 + np.argmin(planes, axis=0)
    return LabelMap(labels, "ldn", LDN_BINS)


def lldp_code(responses) -> int:
    """Two strongest (smallest) Gabor responses, 1-based, as ``t1 * n + t2``."""
    r = np.asarray(responses, dtype=np.float64)
    if r.ndim != 1 or r.size < 2 or not np.all(np.isfinite(r)):
        raise InputError(f"expected a finite response vector, got {responses!r}")
    order = np.argsort(r, kind="stable")
    return (int(order[0]) + 1) * r.size + int(order[1]) + 1


def lldp_gabor_eldp(image, bank: FilterBank) -> LabelMap:
    n = bank.params.n_orientations
    if n != 12:
        raise ParameterError(f"LLDP is defined on a 12-orientation bank, got {n}")
    stack = convolve_responses(image, bank)
    order = np.argsort(stack.responses, axis=0, kind="stable")
    labels = (order[0] + 1) * n + order[1] + 1
    return LabelMap(labels, "lldp", n * n + n)
