"""Oriented real-Gabor line detectors.

Kernel entries follow

    G(x, y) = exp(-(x^2 + y^2) / (2 sigma^2)) / (2 pi sigma^2)
              * cos(2 pi mu (x cos(theta) + y sin(theta)))

sampled on integer offsets ``-h..h`` (``h = (kernel_size - 1) // 2``).
Arrays are indexed ``kernel[row, col]`` with ``x = col - h`` and
``y = row - h``, so ``y`` grows downward like image rows.

The central ridge of a kernel (where the cosine equals one) is the line
``x cos(theta) + y sin(theta) = 0``; ``theta`` is therefore the angle of
the ridge's *normal*. :func:`palmlmdp.dataset_io.render_synthetic` uses
the same convention for its line angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

DEFAULT_MU = 0.11
DEFAULT_SIGMA = 5.6179
DEFAULT_KERNEL_SIZE = 35
DEFAULT_ORIENTATIONS = 12


@dataclass(frozen=True)
class GaborParams:
    mu: float = DEFAULT_MU
    sigma: float = DEFAULT_SIGMA
    kernel_size: int = DEFAULT_KERNEL_SIZE
    n_orientations: int = DEFAULT_ORIENTATIONS
    normalize: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if isinstance(self.kernel_size, bool) or int(self.kernel_size) != self.kernel_size:
            raise ParameterError(f"kernel_size must be an integer, got {self.kernel_size!r}")
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise ParameterError(f"kernel_size must be odd and >= 3, got {self.kernel_size}")
        if int(self.n_orientations) != self.n_orientations or self.n_orientations < 2:
            raise ParameterError(f"n_orientations must be an integer >= 2, got {self.n_orientations}")
        for name in ("mu", "sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def half(self) -> int:
        return (self.kernel_size - 1) // 2


@dataclass(frozen=True)
class DirectionalFilter:
    index: int
    theta: float
    kernel: np.ndarray = field(repr=False, compare=False)
    # (column_vector_over_y, row_vector_over_x, weight) triples whose
    # weighted outer products sum to ``kernel``.
    factors: tuple = field(repr=False, compare=False, default=())


@dataclass(frozen=True)
class FilterBank:
    params: GaborParams
    filters: tuple

    def __len__(self):
        return len(self.filters)

    def __iter__(self):
        return iter(self.filters)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([f.theta for f in self.filters])

    @property
    def kernels(self) -> np.ndarray:
        """All kernels stacked as ``(n_orientations, size, size)``."""
        return np.stack([f.kernel for f in self.filters])


def orientation_angle(index: int, n_orientations: int) -> float:
    """Angle of 1-based orientation ``index``: ``(index - 1) * pi / n``."""
    return (index - 1) * math.pi / n_orientations


def _axis(params: GaborParams) -> np.ndarray:
    return np.arange(-params.half, params.half + 1, dtype=np.float64)


def build_gabor_kernel(params: GaborParams, theta: float) -> np.ndarray:
    """Sample one oriented Gabor kernel.

    With ``params.normalize`` (the default) the kernel mean is subtracted
    afterwards so flat image regions give zero response.
    """
    params.validate()
    if not math.isfinite(theta):
        raise ParameterError(f"theta must be finite, got {theta!r}")
    t = _axis(params)
    y, x = np.meshgrid(t, t, indexing="ij")
    sigma2 = params.sigma * params.sigma
    envelope = np.exp(-(x * x + y * y) / (2.0 * sigma2)) / (2.0 * math.pi * sigma2)
    phase = 2.0 * math.pi * params.mu * (x * math.cos(theta) + y * math.sin(theta))
    kernel = envelope * np.cos(phase)
    if params.normalize:
        kernel = kernel - kernel.mean()
    return kernel


def gabor_factors(params: GaborParams, theta: float) -> tuple:
    """Rank <= 3 separable decomposition of :func:`build_gabor_kernel`.

    Uses cos(a + b) = cos a cos b - sin a sin b on the phase, plus a
    constant term for the removed mean. Returns ``(col, row, weight)``
    triples with ``kernel == sum(weight * outer(col, row))``.
    """
    params.validate()
    t = _axis(params)
    sigma2 = params.sigma * params.sigma
    g = np.exp(-(t * t) / (2.0 * sigma2))
    scale = 1.0 / (2.0 * math.pi * sigma2)
    wx = 2.0 * math.pi * params.mu * math.cos(theta)
    wy = 2.0 * math.pi * params.mu * math.sin(theta)
    factors = [
        (g * np.cos(wy * t), g * np.cos(wx * t), scale),
        (g * np.sin(wy * t), g * np.sin(wx * t), -scale),
    ]
    if params.normalize:
        raw = GaborParams(params.mu, params.sigma, params.kernel_size,
                          params.n_orientations, normalize=False)
        mean = float(build_gabor_kernel(raw, theta).mean())
        ones = np.ones_like(t)
        factors.append((ones, ones, -mean))
    return tuple(factors)


def build_bank(params: GaborParams | None = None) -> FilterBank:
    """Build ``n_orientations`` filters at ``theta_j = (j - 1) pi / n``."""
    if params is None:
        params = GaborParams()
    params.validate()
    n = params.n_orientations
    filters = []
    for j in range(1, n + 1):
        theta = orientation_angle(j, n)
        filters.append(DirectionalFilter(
            index=j,
            theta=theta,
            kernel=_frozen(build_gabor_kernel(params, theta)),
            factors=gabor_factors(params, theta),
        ))
    return FilterBank(params=params, filters=tuple(filters))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a
