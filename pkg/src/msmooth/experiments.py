"""Experiment drivers behind the ``bench``, ``curve`` and ``depth`` commands."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import filters, image_io, metrics
from .filters import FilterKind
from .losses import LossKind
from .smoother import SmootherConfig, smooth_approx, smooth_exact, smooth_multichannel

GRID_SIGMA_S = (2.0, 4.0, 8.0, 16.0)
GRID_SIGMA_R = (0.05, 0.1, 0.2, 0.4)
GRID_SAMPLES = (8, 16, 32, 64, 128)


# -- depth-map denoising -----------------------------------------------------

def synthetic_disparity_scene(height: int = 120, width: int = 160):
    """Piecewise-constant 8-bit disparity map with five regions and a
    matching RGB guide whose region colours carry a mild smooth texture."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    sy, sx = height / 120.0, width / 160.0
    disp = np.full((height, width), 50, dtype=np.uint8)
    colour = np.empty((height, width, 3))
    colour[:] = (40, 90, 160)
    regions = [
        ((yy > 20 * sy) & (yy < 70 * sy) & (xx > 15 * sx) & (xx < 70 * sx), 110, (200, 60, 50)),
        ((yy - 75 * sy) ** 2 / sy**2 + (xx - 110 * sx) ** 2 / sx**2 < 30**2, 170, (230, 210, 70)),
        ((yy > 80 * sy) & (xx < 90 * sx) & (xx / sx - 10 > 120 - yy / sy), 220, (60, 180, 90)),
        ((yy > 5 * sy) & (yy < 35 * sy) & (xx > 100 * sx) & (xx < 150 * sx), 140, (150, 150, 230)),
    ]
    for mask, d, c in regions:
        disp[mask] = d
        colour[mask] = c
    colour += 20.0 * (np.sin(xx / 9.0) * np.cos(yy / 13.0))[..., None]
    guide = np.clip(np.rint(colour), 0, 255).astype(np.uint8)
    return disp, guide


def _noisy(gt: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    return image_io.quantize(
        metrics.add_gaussian_noise(gt / 255.0, metrics.NoiseSpec(sigma, seed))
    )


def calibrate_noise_sigma(
    gt: np.ndarray, target_bad_rate: float = 0.74, seed: int = 0, threshold: float = 1.0
) -> float:
    """Bisect the noise level at which the noisy map has the target bad-pixel rate."""
    lo, hi = 0.0, 0.25
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if metrics.bad_pixel_rate(_noisy(gt, mid, seed), gt, threshold) < target_bad_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class DepthResult:
    noise_sigma: float
    noisy_rate: float
    joint_bilateral_rate: float
    enhanced_rate: float
    noisy: np.ndarray
    joint_bilateral: np.ndarray
    enhanced: np.ndarray


def depth_denoising(
    gt: np.ndarray,
    guide: np.ndarray,
    sigma_s: float = 5.0,
    sigma_r: float = 0.1,
    samples: int | None = 16,
    seed: int = 0,
    target_bad_rate: float = 0.74,
    noise_sigma: float | None = None,
) -> DepthResult:
    """Compare plain and enhanced joint bilateral filtering of a noisy disparity map.

    The enhanced filter is the smoother with the joint bilateral filter and
    truncated L1 loss. The guide may be gray or RGB (RGB is reduced to its
    luminance for the gray disparity map).
    """
    if noise_sigma is None:
        noise_sigma = calibrate_noise_sigma(gt, target_bad_rate, seed)
    noisy = _noisy(gt, noise_sigma, seed)
    g = image_io.to_luminance(guide) if guide.ndim == 3 else image_io.normalize(guide)
    jbf = image_io.quantize(filters.bilateral_filter(noisy / 255.0, g, sigma_s, sigma_r))
    cfg = SmootherConfig.create(FilterKind.BILATERAL, LossKind.TRUNCATED_L1, sigma_s, sigma_r, samples)
    enhanced = smooth_multichannel(noisy, cfg, guide)
    return DepthResult(
        noise_sigma,
        metrics.bad_pixel_rate(noisy, gt),
        metrics.bad_pixel_rate(jbf, gt),
        metrics.bad_pixel_rate(enhanced, gt),
        noisy, jbf, enhanced,
    )


# -- accuracy curve ------------------------------------------------------------

def load_gray_images(directory: str | Path) -> list[tuple[str, np.ndarray]]:
    """All PGM/PPM files in ``directory`` as normalized gray planes, sorted by name."""
    paths = sorted(
        p for p in Path(directory).iterdir() if p.suffix.lower() in (".pgm", ".ppm", ".pnm")
    )
    out = []
    for p in paths:
        img = image_io.load(p)
        plane = image_io.to_luminance(img) if img.ndim == 3 else image_io.normalize(img)
        # Round colour conversions back onto the 8-bit grid.
        out.append((p.stem, image_io.quantize(plane) / 255.0))
    return out


def psnr_curve(
    images: list[np.ndarray],
    losses=tuple(LossKind),
    filter_kinds=tuple(FilterKind),
    sigma_s=GRID_SIGMA_S,
    sigma_r=GRID_SIGMA_R,
    samples=GRID_SAMPLES,
    threads: int = 1,
):
    """Mean PSNR of the approximate engine against the exact one.

    Yields ``(loss, filter, sigma_r, n, mean_psnr)`` with the mean taken over
    images and ``sigma_s`` values.
    """
    if not images:
        raise ValueError("no images")
    for loss_kind, fkind, sr in itertools.product(losses, filter_kinds, sigma_r):
        scores = {n: [] for n in samples}
        for src, ss in itertools.product(images, sigma_s):
            cfg = SmootherConfig.create(fkind, loss_kind, ss, sr, None)
            ref = image_io.quantize(smooth_exact(src, cfg, threads=threads))
            for n in samples:
                approx = smooth_approx(
                    src, SmootherConfig(cfg.filter, cfg.loss, n), threads=threads
                )
                scores[n].append(metrics.psnr(image_io.quantize(approx), ref))
        for n in samples:
            yield LossKind(loss_kind), FilterKind(fkind), sr, n, float(np.mean(scores[n]))


# -- timing ----------------------------------------------------------------------

def _best_time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(
    size: int = 1024,
    seed: int = 0,
    repeats: int = 3,
    box_radii=(2, 8, 32),
    sweep_samples=(8, 16, 32),
    include_bilateral: bool = False,
    threads: int = 1,
):
    """Time box filtering and the approximate smoother on a synthetic image.

    Yields ``(filter, loss, n, ms_per_megapixel)``. Raw box-filter rows are
    labelled ``box_r<radius>`` with loss ``none`` and ``n`` = 1.
    """
    rng = np.random.default_rng(seed)
    src = rng.integers(0, 256, size=(size, size)) / 255.0
    mp = src.size / 1e6
    for r in box_radii:
        t = _best_time(lambda: filters.box_filter(src, r), repeats)
        yield f"box_r{r}", "none", 1, 1e3 * t / mp
    rows = [(FilterKind.BOX, n) for n in sweep_samples]
    rows += [(FilterKind.GAUSSIAN, 16), (FilterKind.GUIDED, 16)]
    if include_bilateral:
        rows.append((FilterKind.BILATERAL, 16))
    for fkind, n in rows:
        cfg = SmootherConfig.create(fkind, LossKind.TRUNCATED_L1, 4.0, 0.1, n)
        t = _best_time(lambda: smooth_approx(src, cfg, threads=threads), repeats)
        yield fkind.value, LossKind.TRUNCATED_L1.value, n, 1e3 * t / mp
