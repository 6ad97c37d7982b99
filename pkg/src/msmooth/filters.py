"""Weighted-average filters: box, Gaussian, bilateral and guided.

Every filter works on a float plane ``(H, W)`` or on a stack of planes
``(K, H, W)`` that share one guidance plane. Stacks let the smoother filter
many cost images per call; each plane of a stack is filtered exactly as it
would be on its own.

Border policy: windows are clipped to the image and the weights renormalized
over in-bounds pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np
from scipy import ndimage

from .image_io import DimensionMismatch


class FilterKind(str, Enum):
    BOX = "box"
    GAUSSIAN = "gaussian"
    BILATERAL = "bilateral"
    GUIDED = "guided"

    @property
    def edge_aware(self) -> bool:
        return self in (FilterKind.BILATERAL, FilterKind.GUIDED)


def radius_from_sigma(sigma_s: float) -> int:
    """Box/guided window radius matching a Gaussian of scale ``sigma_s``.

    ``max(1, floor(sqrt(2) * sigma_s))``.
    """
    if not sigma_s > 0:
        raise ValueError(f"sigma_s must be positive, got {sigma_s}")
    return max(1, int(math.floor(math.sqrt(2.0) * sigma_s)))


def gaussian_radius(sigma_s: float) -> int:
    """Truncation radius of the Gaussian and bilateral kernels."""
    return int(math.ceil(3.0 * sigma_s))


@dataclass(frozen=True)
class FilterSpec:
    """One weighted-average filter with its parameters.

    ``sigma_s`` is in pixels; ``sigma_r`` is a fraction of the normalized
    intensity range and only matters for the bilateral and guided filters
    (and, through the smoother, as the loss scale).
    """

    kind: FilterKind
    sigma_s: float = 4.0
    sigma_r: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if not self.sigma_s > 0:
            raise ValueError(f"sigma_s must be positive, got {self.sigma_s}")
        if not 0 < self.sigma_r:
            raise ValueError(f"sigma_r must be positive, got {self.sigma_r}")

    @property
    def radius(self) -> int:
        return radius_from_sigma(self.sigma_s)

    @property
    def eps(self) -> float:
        return self.sigma_r**2

    @property
    def needs_guide(self) -> bool:
        return self.kind.edge_aware


def _check_guide(src: np.ndarray, guide: np.ndarray) -> None:
    if guide.ndim != 2 or guide.shape != src.shape[-2:]:
        raise DimensionMismatch(
            f"guide shape {guide.shape} does not match source plane shape {src.shape[-2:]}"
        )


def _box_1d(x: np.ndarray, r: int, axis: int) -> np.ndarray:
    # Running-sum window total along one axis, windows clipped at the ends.
    n = x.shape[axis]
    pad = [(0, 0)] * x.ndim
    pad[axis] = (1, 0)
    c = np.cumsum(np.pad(x, pad), axis=axis)
    idx = np.arange(n)
    hi = np.minimum(idx + r, n - 1) + 1
    lo = np.maximum(idx - r, 0)
    return np.take(c, hi, axis=axis) - np.take(c, lo, axis=axis)


def _clipped_counts(n: int, r: int) -> np.ndarray:
    idx = np.arange(n)
    return (np.minimum(idx + r, n - 1) - np.maximum(idx - r, 0) + 1).astype(np.float64)


def box_filter(src: np.ndarray, r: int) -> np.ndarray:
    """Mean over the clipped ``(2r+1) x (2r+1)`` window.

    Separable running sums, so the cost per pixel does not depend on ``r``.
    """
    if r < 1:
        raise ValueError(f"box radius must be >= 1, got {r}")
    src = np.asarray(src, dtype=np.float64)
    h, w = src.shape[-2:]
    total = _box_1d(_box_1d(src, r, axis=-1), r, axis=-2)
    area = np.outer(_clipped_counts(h, r), _clipped_counts(w, r))
    return total / area


def gaussian_kernel(sigma_s: float) -> np.ndarray:
    """Unnormalized 1-D taps ``exp(-d^2 / (2 sigma_s^2))`` for ``|d| <= ceil(3 sigma_s)``."""
    rad = gaussian_radius(sigma_s)
    d = np.arange(-rad, rad + 1, dtype=np.float64)
    return np.exp(-(d * d) / (2.0 * sigma_s * sigma_s))


def gaussian_filter(src: np.ndarray, sigma_s: float) -> np.ndarray:
    """Truncated separable Gaussian, renormalized by the in-bounds kernel mass."""
    if not sigma_s > 0:
        raise ValueError(f"sigma_s must be positive, got {sigma_s}")
    src = np.asarray(src, dtype=np.float64)
    g = gaussian_kernel(sigma_s)
    out = ndimage.correlate1d(src, g, axis=-1, mode="constant", cval=0.0)
    out = ndimage.correlate1d(out, g, axis=-2, mode="constant", cval=0.0)
    h, w = src.shape[-2:]
    wy = ndimage.correlate1d(np.ones(h), g, mode="constant", cval=0.0)
    wx = ndimage.correlate1d(np.ones(w), g, mode="constant", cval=0.0)
    return out / np.outer(wy, wx)


@numba.njit(cache=True, nogil=True)
def _bilateral_kernel(src, guide, rad, spatial, inv_two_sr2, out):
    # src/out: (H, W, K) so the innermost loop runs over contiguous planes.
    h, w, k = src.shape
    acc = np.empty(k)
    for y in range(h):
        y0 = max(0, y - rad)
        y1 = min(h - 1, y + rad)
        for x in range(w):
            x0 = max(0, x - rad)
            x1 = min(w - 1, x + rad)
            tp = guide[y, x]
            for j in range(k):
                acc[j] = 0.0
            wsum = 0.0
            for yy in range(y0, y1 + 1):
                sy = spatial[yy - y + rad]
                for xx in range(x0, x1 + 1):
                    d = guide[yy, xx] - tp
                    wt = sy * spatial[xx - x + rad] * math.exp(-d * d * inv_two_sr2)
                    wsum += wt
                    for j in range(k):
                        acc[j] += wt * src[yy, xx, j]
            for j in range(k):
                out[y, x, j] = acc[j] / wsum


def bilateral_filter(
    src: np.ndarray, guide: np.ndarray, sigma_s: float, sigma_r: float
) -> np.ndarray:
    """Joint bilateral filter by direct summation over radius ``ceil(3 sigma_s)``.

    Weights are ``G_s(|p - q|) * G_r(|T_p - T_q|)`` with ``T`` the guide;
    passing ``guide=src`` gives the classic bilateral filter.
    """
    if not sigma_s > 0 or not sigma_r > 0:
        raise ValueError("sigma_s and sigma_r must be positive")
    src = np.asarray(src, dtype=np.float64)
    guide = np.ascontiguousarray(guide, dtype=np.float64)
    _check_guide(src, guide)
    stack = src if src.ndim == 3 else src[None]
    hwk = np.ascontiguousarray(np.moveaxis(stack, 0, -1))
    out = np.empty_like(hwk)
    _bilateral_kernel(
        hwk, guide, gaussian_radius(sigma_s), gaussian_kernel(sigma_s),
        1.0 / (2.0 * sigma_r * sigma_r), out,
    )
    out = np.moveaxis(out, -1, 0)
    return out if src.ndim == 3 else out[0]


@dataclass
class GuidedWindowStats:
    """Per-window statistics of the guided filter.

    ``mean_T`` and ``var_T`` depend on the guide only; ``a`` and ``b`` are
    the linear coefficients for one source (``b = mean_I - a * mean_T``).
    """

    mean_T: np.ndarray
    var_T: np.ndarray
    a: np.ndarray | None = None
    b: np.ndarray | None = None


def guide_statistics(guide: np.ndarray, r: int) -> GuidedWindowStats:
    mean_t = box_filter(guide, r)
    var_t = box_filter(guide * guide, r) - mean_t * mean_t
    # Cancellation can leave tiny negatives.
    np.maximum(var_t, 0.0, out=var_t)
    return GuidedWindowStats(mean_T=mean_t, var_T=var_t)


def guided_coefficients(
    src: np.ndarray, guide: np.ndarray, r: int, eps: float,
    stats: GuidedWindowStats | None = None,
) -> GuidedWindowStats:
    if stats is None:
        stats = guide_statistics(guide, r)
    mean_i = box_filter(src, r)
    cov = box_filter(src * guide, r) - stats.mean_T * mean_i
    a = cov / (stats.var_T + eps)
    b = mean_i - a * stats.mean_T
    return GuidedWindowStats(stats.mean_T, stats.var_T, a, b)


def guided_filter(
    src: np.ndarray, guide: np.ndarray, r: int, eps: float,
    stats: GuidedWindowStats | None = None,
) -> np.ndarray:
    """Single-channel guided filter built from six box filterings.

    ``stats`` may carry precomputed guide statistics so that a stack of
    sources sharing one guide does not recompute them.
    """
    if r < 1:
        raise ValueError(f"guided radius must be >= 1, got {r}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    src = np.asarray(src, dtype=np.float64)
    guide = np.asarray(guide, dtype=np.float64)
    _check_guide(src, guide)
    coef = guided_coefficients(src, guide, r, eps, stats)
    return box_filter(coef.a, r) * guide + box_filter(coef.b, r)


def apply(spec: FilterSpec, src: np.ndarray, guide: np.ndarray | None = None) -> np.ndarray:
    """Filter ``src`` (a plane or a stack of planes) as described by ``spec``."""
    if spec.needs_guide and guide is None:
        raise ValueError(f"{spec.kind.value} filter needs a guidance plane")
    if spec.kind is FilterKind.BOX:
        return box_filter(src, spec.radius)
    if spec.kind is FilterKind.GAUSSIAN:
        return gaussian_filter(src, spec.sigma_s)
    if spec.kind is FilterKind.BILATERAL:
        return bilateral_filter(src, guide, spec.sigma_s, spec.sigma_r)
    return guided_filter(src, guide, spec.radius, spec.eps)
