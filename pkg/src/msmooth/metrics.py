"""Quality metrics and seeded noise synthesis.

Noise generator (fixed so that seeded results are reproducible anywhere):
Philox4x64-10 keyed with the 64-bit seed (``numpy.random.Philox(key=seed)``,
counter starting at zero). Element ``i`` of the flattened array uses raw
64-bit words ``2i`` and ``2i+1`` of the stream; each word ``w`` becomes a
uniform ``u = ((w >> 11) + 1) * 2**-53`` in ``(0, 1]`` and the pair is turned
into one standard normal by Box-Muller, ``sqrt(-2 ln u1) * cos(2 pi u2)``.
Because every element depends only on its own counter position, the result
is independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image_io import DimensionMismatch

PSNR_CAP = 99.0


def _same(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape {a.shape} != {b.shape}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """PSNR in dB between two 8-bit images (peak 255); identical images give 99."""
    _same(a, b)
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(255.0**2 / mse))


def bad_pixel_rate(est: np.ndarray, gt: np.ndarray, threshold: float = 1.0) -> float:
    """Fraction of pixels whose absolute error is strictly above ``threshold``."""
    _same(est, gt)
    err = np.abs(est.astype(np.float64) - gt.astype(np.float64))
    return float(np.mean(err > threshold))


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"noise sigma must be >= 0, got {self.sigma}")


def standard_normal(seed: int, shape) -> np.ndarray:
    """Counter-based standard normals (see module docstring for the recipe)."""
    size = int(np.prod(shape))
    words = np.random.Philox(key=seed & (2**64 - 1)).random_raw(2 * size)
    u = ((words >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u1, u2 = u[0::2], u[1::2]
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return z.reshape(shape)


def add_gaussian_noise(src: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Add N(0, sigma^2) noise to a normalized plane (or array) and clamp to [0, 1]."""
    src = np.asarray(src, dtype=np.float64)
    if spec.sigma == 0:
        return src.copy()
    return np.clip(src + spec.sigma * standard_normal(spec.seed, src.shape), 0.0, 1.0)
