"""Generalized M-smoother solved by cost-volume filtering.

For every candidate level ``theta`` the cost image ``loss(theta - I)`` is
filtered with a weighted-average filter; each output pixel takes the level
whose filtered cost is smallest. The exact engine scans all 256 levels of
the 8-bit grid. The approximate engine scans ``n`` evenly spaced samples and
refines the winner with a parabola through it and its two neighbours.

Cost images are streamed in small chunks: only the running minimum, its
level index and the filtered costs at the two neighbouring levels are kept
per pixel, so memory is O(image) rather than O(image * levels).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import filters
from .filters import FilterKind, FilterSpec
from .image_io import DimensionMismatch, channels, normalize, quantize, to_luminance
from .losses import LossKind, LossSpec, cost_stack

EXACT_LEVEL_COUNT = 256

# A later level replaces the running minimum only if it is lower by more
# than this. Ties (up to summation round-off) therefore go to the smallest
# level whichever filter implementation produced the costs.
TIE_TOL = 1e-9

# Parabola denominators below this are treated as flat.
FLAT_DENOMINATOR = 1e-12

_CHUNK_BYTES = 48 * 2**20
# The bilateral kernel recomputes its weights once per chunk, so it gets
# bigger chunks.
_BILATERAL_CHUNK_BYTES = 320 * 2**20
_MAX_CHUNK = 64


@dataclass(frozen=True)
class SampleSet:
    """Candidate output levels, ascending and evenly spaced over [0, 1]."""

    levels: np.ndarray

    @property
    def n(self) -> int:
        return len(self.levels)


def sample_levels(n: int) -> SampleSet:
    """``n`` levels ``i / (n - 1)``; ``n = 256`` gives the 8-bit grid."""
    if n < 2:
        raise ValueError(f"need at least 2 sample levels, got {n}")
    levels = np.arange(n, dtype=np.float64) / (n - 1)
    levels.setflags(write=False)
    return SampleSet(levels)


@dataclass(frozen=True)
class RefinementTriple:
    theta_minus: float
    theta_zero: float
    theta_plus: float
    f_minus: float
    f_zero: float
    f_plus: float


def _refine(t_minus, t_zero, t_plus, f_minus, f_zero, f_plus):
    den = 4.0 * (f_plus + f_minus - 2.0 * f_zero)
    flat = np.abs(den) < FLAT_DENOMINATOR
    safe = np.where(flat, 1.0, den)
    shifted = t_zero - (t_plus - t_minus) * (f_plus - f_minus) / safe
    shifted = np.clip(shifted, t_minus, t_plus)
    return np.where(flat, t_zero, shifted)


def parabolic_refine(t: RefinementTriple) -> float:
    """Vertex of the parabola through three (level, filtered cost) samples.

    The result is clamped to ``[theta_minus, theta_plus]``; a (nearly) flat
    triple returns ``theta_zero``.
    """
    return float(
        _refine(t.theta_minus, t.theta_zero, t.theta_plus, t.f_minus, t.f_zero, t.f_plus)
    )


@dataclass(frozen=True)
class SmootherConfig:
    """Filter, loss and number of samples (``None`` selects the exact engine).

    The loss scale is tied to the filter's range parameter.
    """

    filter: FilterSpec
    loss: LossSpec
    samples: int | None = 16

    def __post_init__(self):
        if self.loss.sigma != self.filter.sigma_r:
            raise ValueError(
                f"loss sigma {self.loss.sigma} must equal filter sigma_r {self.filter.sigma_r}"
            )
        if self.samples is not None and self.samples < 2:
            raise ValueError(f"need at least 2 samples, got {self.samples}")

    @classmethod
    def create(
        cls,
        filter_kind: FilterKind | str = FilterKind.BOX,
        loss_kind: LossKind | str = LossKind.TRUNCATED_L1,
        sigma_s: float = 4.0,
        sigma_r: float = 0.1,
        samples: int | None = 16,
    ) -> SmootherConfig:
        return cls(
            FilterSpec(FilterKind(filter_kind), sigma_s, sigma_r),
            LossSpec(LossKind(loss_kind), sigma_r),
            samples,
        )

    @property
    def exact(self) -> bool:
        return self.samples is None


class _CostFilter:
    """Filters stacks of cost images with state shared across chunks."""

    def __init__(self, spec: FilterSpec, guide: np.ndarray | None):
        self.spec = spec
        self.guide = guide
        self.stats = None
        if spec.kind is FilterKind.GUIDED:
            self.stats = filters.guide_statistics(guide, spec.radius)

    def __call__(self, stack: np.ndarray) -> np.ndarray:
        if self.spec.kind is FilterKind.GUIDED:
            return filters.guided_filter(
                stack, self.guide, self.spec.radius, self.spec.eps, stats=self.stats
            )
        return filters.apply(self.spec, stack, self.guide)


@dataclass
class LevelScan:
    """Per-pixel result of scanning filtered costs over a level set.

    ``index`` is the argmin level index; ``f_zero`` its filtered cost;
    ``f_minus``/``f_plus`` the filtered costs at the neighbouring levels
    (NaN where the neighbour does not exist).
    """

    levels: np.ndarray
    index: np.ndarray
    f_zero: np.ndarray
    f_minus: np.ndarray
    f_plus: np.ndarray


def _resolve_guide(src: np.ndarray, spec: FilterSpec, guide: np.ndarray | None):
    if not spec.needs_guide:
        return None
    if guide is None:
        return src
    guide = np.asarray(guide, dtype=np.float64)
    if guide.shape != src.shape:
        raise DimensionMismatch(f"guide shape {guide.shape} != source shape {src.shape}")
    return guide


def _chunk_size(shape: tuple[int, int], kind: FilterKind) -> int:
    budget = _BILATERAL_CHUNK_BYTES if kind is FilterKind.BILATERAL else _CHUNK_BYTES
    per_plane = shape[0] * shape[1] * 8 * 4
    return int(max(1, min(_MAX_CHUNK, budget // per_plane)))


def scan_levels(
    src: np.ndarray,
    levels: np.ndarray,
    filter_spec: FilterSpec,
    loss_spec: LossSpec,
    guide: np.ndarray | None = None,
    threads: int = 1,
) -> LevelScan:
    """Filter the cost image of every level and track the per-pixel argmin.

    Chunks of levels are filtered (optionally on several threads) and then
    folded into the running state strictly in ascending level order, so the
    result does not depend on ``threads``.
    """
    src = np.asarray(src, dtype=np.float64)
    if src.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {src.shape}")
    guide = _resolve_guide(src, filter_spec, guide)
    levels = np.asarray(levels, dtype=np.float64)
    cost_filter = _CostFilter(filter_spec, guide)
    chunk = _chunk_size(src.shape, filter_spec.kind)
    if threads > 1:
        chunk = max(chunk, threads)

    best = index = f_minus = f_plus = prev = None
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for start in range(0, len(levels), chunk):
            thetas = levels[start : start + chunk]
            if pool is None:
                filtered = cost_filter(cost_stack(src, thetas, loss_spec))
            else:
                parts = np.array_split(thetas, min(threads, len(thetas)))
                jobs = [
                    pool.submit(lambda t: cost_filter(cost_stack(src, t, loss_spec)), part)
                    for part in parts
                ]
                filtered = np.concatenate([j.result() for j in jobs], axis=0)
            for offset, f in enumerate(filtered):
                i = start + offset
                if best is None:
                    best = f.copy()
                    index = np.zeros(src.shape, dtype=np.intp)
                    f_minus = np.full(src.shape, np.nan)
                    f_plus = np.full(src.shape, np.nan)
                else:
                    np.copyto(f_plus, f, where=index == i - 1)
                    better = f < best - TIE_TOL
                    np.copyto(best, f, where=better)
                    np.copyto(index, i, where=better)
                    np.copyto(f_minus, prev, where=better)
                    np.copyto(f_plus, np.nan, where=better)
                prev = f
    finally:
        if pool is not None:
            pool.shutdown()
    return LevelScan(levels, index, best, f_minus, f_plus)


def smooth_exact(
    src: np.ndarray, cfg: SmootherConfig, guide: np.ndarray | None = None, threads: int = 1
) -> np.ndarray:
    """Reference smoother over all 256 levels of the 8-bit grid.

    Ties go to the smallest level. ``cfg.samples`` is ignored. For the
    bilateral and guided filters a missing ``guide`` means self-guidance.
    """
    scan = scan_levels(
        src, sample_levels(EXACT_LEVEL_COUNT).levels, cfg.filter, cfg.loss, guide, threads
    )
    return scan.levels[scan.index]


def refine_scan(scan: LevelScan) -> np.ndarray:
    """Parabolic refinement of a scan; endpoint winners are returned as-is."""
    levels = scan.levels
    n = len(levels)
    idx = scan.index
    inner = (idx > 0) & (idx < n - 1)
    i = np.clip(idx, 1, n - 2)
    with np.errstate(invalid="ignore"):
        refined = _refine(
            levels[i - 1], levels[i], levels[i + 1], scan.f_minus, scan.f_zero, scan.f_plus
        )
    return np.where(inner, refined, levels[idx])


def smooth_approx(
    src: np.ndarray, cfg: SmootherConfig, guide: np.ndarray | None = None, threads: int = 1
) -> np.ndarray:
    """Sampled smoother with ``cfg.samples`` levels and parabolic refinement.

    Returns continuous values in [0, 1], each within one sample spacing of
    the winning sample.
    """
    if cfg.samples is None:
        raise ValueError("smooth_approx needs cfg.samples")
    scan = scan_levels(
        src, sample_levels(cfg.samples).levels, cfg.filter, cfg.loss, guide, threads
    )
    return refine_scan(scan)


def smooth(
    src: np.ndarray, cfg: SmootherConfig, guide: np.ndarray | None = None, threads: int = 1
) -> np.ndarray:
    if cfg.exact:
        return smooth_exact(src, cfg, guide, threads)
    return smooth_approx(src, cfg, guide, threads)


def guide_plane(img: np.ndarray, guide: np.ndarray, channel: int) -> np.ndarray:
    """Guidance plane for channel ``channel`` of ``img`` taken from an 8-bit guide."""
    if channels(guide) == 3 and channels(img) == 3:
        return normalize(guide, channel)
    if channels(guide) == 3:
        return to_luminance(guide)
    return normalize(guide, 0)


def smooth_multichannel(
    img: np.ndarray, cfg: SmootherConfig, guide: np.ndarray | None = None, threads: int = 1
) -> np.ndarray:
    """Smooth each channel of an 8-bit image independently and quantize.

    With an edge-aware filter the guidance plane is the matching channel of
    an RGB guide, the luminance of an RGB guide for a gray input, or the
    guide's only channel. Without a guide each channel guides itself.
    """
    if guide is not None and guide.shape[:2] != img.shape[:2]:
        raise DimensionMismatch(
            f"guide size {guide.shape[1]}x{guide.shape[0]} != image size {img.shape[1]}x{img.shape[0]}"
        )
    out = []
    for c in range(channels(img)):
        plane = normalize(img, c)
        g = None
        if guide is not None and cfg.filter.needs_guide:
            g = guide_plane(img, guide, c)
        out.append(quantize(smooth(plane, cfg, g, threads)))
    return out[0] if len(out) == 1 else np.stack(out, axis=-1)
