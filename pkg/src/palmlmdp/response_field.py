"""Directional filter responses and the single dominant direction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InputError
from .filter_bank import FilterBank

# Responses are snapped to this absolute grid so that floating-point
# residue (kernels are zero-mean only to ~1e-17) cannot break exact ties
# on flat regions.
RESPONSE_QUANTUM = 1e-9

# scipy "mirror" == numpy "reflect": d c b | a b c d | c b a
PAD_MODE = "mirror"


@dataclass(frozen=True)
class GrayImage:
    """Grayscale raster, ``pixels[row, col]`` as float64 in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] == 0 or px.shape[1] == 0:
            raise InputError(f"image must be a non-empty 2-D array, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise InputError("image contains non-finite values")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_flat(cls, width, height, values):
        values = np.asarray(values, dtype=np.float64)
        if values.size != width * height:
            raise InputError(f"expected {width * height} pixels, got {values.size}")
        return cls(values.reshape(height, width))


@dataclass(frozen=True)
class ResponseStack:
    """Per-orientation response planes, ``responses[j - 1, row, col]``."""

    responses: np.ndarray

    @property
    def n_orientations(self) -> int:
        return self.responses.shape[0]

    @property
    def height(self) -> int:
        return self.responses.shape[1]

    @property
    def width(self) -> int:
        return self.responses.shape[2]

    def at(self, x: int, y: int) -> np.ndarray:
        """Response vector (r_1..r_n) at column ``x``, row ``y``."""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise InputError(f"({x}, {y}) outside {self.width}x{self.height} stack")
        return self.responses[:, y, x]


def _as_image(image) -> GrayImage:
    return image if isinstance(image, GrayImage) else GrayImage(image)


def _check_size(img: GrayImage):
    if img.height < 3 or img.width < 3:
        raise InputError(f"image must be at least 3x3, got {img.width}x{img.height}")


def quantize(r: np.ndarray) -> np.ndarray:
    q = np.round(r / RESPONSE_QUANTUM) * RESPONSE_QUANTUM
    return q + 0.0  # folds -0.0 into 0.0


def convolve_responses(image, bank: FilterBank) -> ResponseStack:
    """Filter ``image`` with every kernel of ``bank``.

    Output planes have the image's size (mirror padding). The kernels
    are point-symmetric, so correlation and convolution coincide; the
    work is done as a sum of separable row/column passes.

    Sign: the value at a pixel is the kernel-weighted sum of intensities,
    so a dark line lying on a kernel's central ridge produces the most
    negative value over orientations and :func:`dominant_direction`
    picks it with argmin.
    """
    img = _as_image(image)
    _check_size(img)
    px = img.pixels
    planes = np.empty((len(bank), img.height, img.width))
    for j, filt in enumerate(bank.filters):
        acc = np.zeros_like(px)
        for col, row, weight in filt.factors:
            tmp = ndimage.correlate1d(px, row, axis=1, mode=PAD_MODE)
            acc += weight * ndimage.correlate1d(tmp, col, axis=0, mode=PAD_MODE)
        planes[j] = acc
    planes = quantize(planes)
    planes.setflags(write=False)
    return ResponseStack(planes)


def convolve_responses_direct(image, bank: FilterBank) -> ResponseStack:
    """Reference path: full 2-D correlation with each dense kernel."""
    img = _as_image(image)
    _check_size(img)
    planes = np.stack([
        ndimage.correlate(img.pixels, f.kernel, mode=PAD_MODE) for f in bank.filters
    ])
    return ResponseStack(quantize(planes))


def dominant_direction(stack: ResponseStack, x: int, y: int) -> int:
    """1-based orientation index of the minimum response (first on ties)."""
    return int(np.argmin(stack.at(x, y))) + 1


def dominant_direction_map(stack: ResponseStack) -> np.ndarray:
    return np.argmin(stack.responses, axis=0) + 1
