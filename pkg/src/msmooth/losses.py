"""Robust loss functions, their influence functions, and cost images.

All five losses are even in ``x`` and minimal at ``x = 0``. Apart from L1
they have redescending influence functions, which is what lets the smoother
keep sharp edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Width factor of the negative Gauss loss relative to sigma.
NGAUSS_WIDTH = 0.64


class LossKind(str, Enum):
    L1 = "l1"
    TRUNCATED_L1 = "tl1"
    NEGATIVE_GAUSS = "ngauss"
    TUKEY = "tukey"
    GEMAN_REYNOLDS = "gr"

    @property
    def redescending(self) -> bool:
        return self is not LossKind.L1


@dataclass(frozen=True)
class LossSpec:
    """A loss kind with its scale ``sigma`` (normalized intensity units).

    L1 ignores ``sigma``.
    """

    kind: LossKind
    sigma: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if not self.sigma > 0:
            raise ValueError(f"loss sigma must be positive, got {self.sigma}")


def loss(spec: LossSpec, x):
    """Evaluate the loss at ``x`` (scalar or array) in double precision."""
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    s = spec.sigma
    kind = spec.kind
    if kind is LossKind.L1:
        out = ax
    elif kind is LossKind.TRUNCATED_L1:
        out = np.minimum(ax, s)
    elif kind is LossKind.NEGATIVE_GAUSS:
        c = NGAUSS_WIDTH * s
        out = 1.0 - np.exp(-(x * x) / (c * c))
    elif kind is LossKind.TUKEY:
        u = (x * x) / (s * s)
        out = np.where(ax <= s, u - u * u + u * u * u / 3.0, 1.0 / 3.0)
    else:
        out = -s / (s + ax)
    return out if out.ndim else float(out)


def influence(spec: LossSpec, x):
    """Derivative of :func:`loss` with respect to ``x``.

    At the kinks (``x = 0`` for L1, ``|x| = sigma`` for truncated L1) the
    value returned is one of the one-sided derivatives.
    """
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    s = spec.sigma
    kind = spec.kind
    if kind is LossKind.L1:
        out = np.sign(x)
    elif kind is LossKind.TRUNCATED_L1:
        out = np.where(ax <= s, np.sign(x), 0.0)
    elif kind is LossKind.NEGATIVE_GAUSS:
        c2 = (NGAUSS_WIDTH * s) ** 2
        out = 2.0 * x / c2 * np.exp(-(x * x) / c2)
    elif kind is LossKind.TUKEY:
        u = 1.0 - (x * x) / (s * s)
        out = np.where(ax <= s, 2.0 * x / (s * s) * u * u, 0.0)
    else:
        out = s * np.sign(x) / (s + ax) ** 2
    return out if out.ndim else float(out)


def cost_image(src: np.ndarray, theta: float, spec: LossSpec) -> np.ndarray:
    """Per-pixel cost ``loss(theta - src)`` of outputting level ``theta``."""
    return loss(spec, theta - np.asarray(src, dtype=np.float64))


def cost_stack(src: np.ndarray, thetas: np.ndarray, spec: LossSpec) -> np.ndarray:
    """Cost images for several levels at once, shape ``(len(thetas), H, W)``."""
    thetas = np.asarray(thetas, dtype=np.float64)
    return loss(spec, thetas[:, None, None] - np.asarray(src, dtype=np.float64)[None])
