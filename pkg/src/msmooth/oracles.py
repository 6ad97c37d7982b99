"""Slow, direct reference implementations used to cross-check the fast paths.

Nothing here shares code with :mod:`msmooth.filters` or the level scan in
:mod:`msmooth.smoother`: weights are written out per pixel pair from their
defining formulas and the M-smoother objective is minimized directly.
Intended for small images only.
"""

from __future__ import annotations

import math

import numpy as np

from .filters import FilterKind, FilterSpec
from .losses import LossSpec, loss

MAX_PIXELS = 4096
_TIE_TOL = 1e-9


def _windows(img: np.ndarray, r: int):
    h, w = img.shape
    for y in range(h):
        for x in range(w):
            yield y, x, img[max(0, y - r) : y + r + 1, max(0, x - r) : x + r + 1]


def brute_median(img: np.ndarray, r: int) -> np.ndarray:
    """Lower median of each clipped ``(2r+1)^2`` window of a gray uint8 image."""
    if r < 1:
        raise ValueError("r must be >= 1")
    out = np.empty_like(img)
    for y, x, win in _windows(img, r):
        vals = sorted(win.ravel().tolist())
        out[y, x] = vals[(len(vals) - 1) // 2]
    return out


def brute_mode(img: np.ndarray, r: int) -> np.ndarray:
    """Most frequent value of each clipped window; ties go to the smallest value."""
    if r < 1:
        raise ValueError("r must be >= 1")
    out = np.empty_like(img)
    for y, x, win in _windows(img, r):
        counts = np.bincount(win.ravel(), minlength=256)
        out[y, x] = int(np.argmax(counts))
    return out


def _gauss(d: float, sigma: float) -> float:
    return math.exp(-(d * d) / (2.0 * sigma * sigma))


def _spatial_row(spec: FilterSpec, guide: np.ndarray, y: int, x: int) -> np.ndarray:
    # Unnormalized weights of pixel (y, x) for box/Gaussian/bilateral rules.
    h, w = guide.shape
    row = np.zeros(h * w)
    if spec.kind is FilterKind.BOX:
        rad = spec.radius
    else:
        rad = int(math.ceil(3.0 * spec.sigma_s))
    for qy in range(max(0, y - rad), min(h, y + rad + 1)):
        for qx in range(max(0, x - rad), min(w, x + rad + 1)):
            if spec.kind is FilterKind.BOX:
                wt = 1.0
            else:
                # Square window; G(|p - q|) factors into the two axes.
                wt = _gauss(qy - y, spec.sigma_s) * _gauss(qx - x, spec.sigma_s)
                if spec.kind is FilterKind.BILATERAL:
                    wt *= _gauss(guide[qy, qx] - guide[y, x], spec.sigma_r)
            row[qy * w + qx] = wt
    return row


def _guided_row(
    spec: FilterSpec, guide: np.ndarray, y: int, x: int, clipped: bool
) -> np.ndarray | None:
    """Guided-filter weights of pixel (y, x) as a sum over covering windows.

    With ``clipped=False`` this is the textbook form: every window has
    ``(2r+1)^2`` pixels and the pixel is only valid if all windows covering
    it lie inside the image (``None`` is returned otherwise). With
    ``clipped=True`` windows are clipped to the image and each average uses
    its own pixel count, which is what the box-filter algorithm computes.
    """
    h, w = guide.shape
    r = spec.radius
    eps = spec.eps
    full = (2 * r + 1) ** 2
    row = np.zeros(h * w)
    centres = [
        (ky, kx)
        for ky in range(y - r, y + r + 1)
        for kx in range(x - r, x + r + 1)
    ]
    inside = [(ky, kx) for ky, kx in centres if 0 <= ky < h and 0 <= kx < w]
    if not clipped:
        if y - 2 * r < 0 or x - 2 * r < 0 or y + 2 * r >= h or x + 2 * r >= w:
            return None
    n_p = len(inside) if clipped else full
    tp = guide[y, x]
    for ky, kx in inside:
        ys = slice(max(0, ky - r), min(h, ky + r + 1))
        xs = slice(max(0, kx - r), min(w, kx + r + 1))
        win = guide[ys, xs]
        n_k = win.size if clipped else full
        mu = win.mean()
        var = max(float((win * win).mean() - mu * mu), 0.0)
        coef = (tp - mu) / (var + eps)
        qy, qx = np.mgrid[ys, xs]
        contrib = (1.0 + coef * (win - mu)) / (n_p * n_k)
        np.add.at(row, (qy * w + qx).ravel(), contrib.ravel())
    return row


def weight_matrix(
    spec: FilterSpec, guide: np.ndarray, border: str = "interior"
) -> np.ndarray:
    """Dense ``(N, N)`` matrix of normalized weights ``w_pq``.

    Rows for which the rule is not defined (guided filter near the border
    with ``border="interior"``) are NaN.
    """
    guide = np.asarray(guide, dtype=np.float64)
    h, w = guide.shape
    if h * w > MAX_PIXELS:
        raise ValueError(f"oracles are limited to {MAX_PIXELS} pixels, got {h * w}")
    if border not in ("interior", "clipped"):
        raise ValueError(f"unknown border mode {border!r}")
    mat = np.empty((h * w, h * w))
    for y in range(h):
        for x in range(w):
            if spec.kind is FilterKind.GUIDED:
                row = _guided_row(spec, guide, y, x, clipped=border == "clipped")
                if row is None:
                    mat[y * w + x] = np.nan
                    continue
            else:
                row = _spatial_row(spec, guide, y, x)
            mat[y * w + x] = row / row.sum()
    return mat


def brute_weighted_filter(
    spec: FilterSpec,
    src: np.ndarray,
    guide: np.ndarray | None = None,
    border: str = "interior",
) -> np.ndarray:
    """Weighted average with explicitly evaluated per-pair weights.

    NaN marks pixels where the guided rule is undefined (see
    :func:`weight_matrix`).
    """
    src = np.asarray(src, dtype=np.float64)
    guide = src if guide is None else np.asarray(guide, dtype=np.float64)
    mat = weight_matrix(spec, guide, border)
    out = np.empty(src.size)
    flat = src.ravel()
    for p in range(src.size):
        out[p] = math.fsum(mat[p] * flat) if not np.isnan(mat[p, 0]) else np.nan
    return out.reshape(src.shape)


def brute_msmooth(
    src: np.ndarray,
    spec: FilterSpec,
    loss_spec: LossSpec,
    guide: np.ndarray | None = None,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """Direct minimization of ``sum_q loss(theta - I_q) w_pq`` over the 8-bit grid.

    Each pixel's objective is evaluated at all 256 levels with explicit
    weights (guided weights use clipped windows so that they are defined at
    every pixel); ties go to the smallest level. ``weights`` may carry a
    precomputed ``weight_matrix(spec, guide, "clipped")`` to share it across
    several losses.
    """
    src = np.asarray(src, dtype=np.float64)
    if guide is None:
        guide = src
    mat = weight_matrix(spec, guide, border="clipped") if weights is None else weights
    thetas = np.arange(256) / 255.0
    flat = src.ravel()
    out = np.empty(src.size)
    for p in range(src.size):
        nz = np.nonzero(mat[p])[0]
        objective = loss(loss_spec, thetas[:, None] - flat[nz][None, :]) @ mat[p, nz]
        best = 0
        for i in range(1, len(thetas)):
            if objective[i] < objective[best] - _TIE_TOL:
                best = i
        out[p] = thetas[best]
    return out.reshape(src.shape)
