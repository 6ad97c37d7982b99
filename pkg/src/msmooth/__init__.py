"""Generalized M-smoother: robust piecewise-constant smoothing by filtering cost images."""

from .filters import FilterKind, FilterSpec
from .image_io import DimensionMismatch, PNMError
from .losses import LossKind, LossSpec
from .smoother import (
    SmootherConfig,
    smooth,
    smooth_approx,
    smooth_exact,
    smooth_multichannel,
)

__all__ = [
    "DimensionMismatch",
    "FilterKind",
    "FilterSpec",
    "LossKind",
    "LossSpec",
    "PNMError",
    "SmootherConfig",
    "smooth",
    "smooth_approx",
    "smooth_exact",
    "smooth_multichannel",
]
