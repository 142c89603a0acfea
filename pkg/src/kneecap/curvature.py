"""Discrete curvature of the smoothed capacity fade curve.

Capacity is normalized by nameplate capacity and smoothed; the curve is then
treated as a plane curve (cycle, q(cycle)) and its signed curvature

    kappa = q'' / (1 + q'^2) ** 1.5

is evaluated per cycle, with the cycle axis kept in raw cycles so kappa has
units of cycle^-1. Large |kappa| marks where the fade trajectory bends: the
knee, and the earlier knee-onset. Accelerating capacity loss is concave
down, so the knee region has kappa < 0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .preprocess import default_smoother_config, normalize, smooth_derivatives


@dataclass(frozen=True)
class CurvatureSeries:
    """Per-cycle curvature of the normalized capacity fade curve."""

    cycle: np.ndarray
    kappa: np.ndarray
    dt: float

    def __post_init__(self):
        cycle = np.asarray(self.cycle, dtype=float)
        kappa = np.asarray(self.kappa, dtype=float)
        cycle.flags.writeable = False
        kappa.flags.writeable = False
        object.__setattr__(self, "cycle", cycle)
        object.__setattr__(self, "kappa", kappa)
        if len(cycle) != len(kappa):
            raise DomainError("cycle and kappa must have equal length")
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        gaps = np.diff(cycle)
        if len(gaps) and not np.allclose(gaps, self.dt, rtol=1e-9, atol=0):
            raise DomainError("cycle grid is not uniform with step dt")

    def __len__(self):
        return len(self.cycle)


def curvature_from_derivatives(y1, y2):
    """Signed plane-curve curvature from first and second derivatives."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    if y1.shape != y2.shape:
        raise DomainError("y1 and y2 must have equal length")
    return y2 / (1.0 + y1 * y1) ** 1.5


def approximate_curvature(series, cfg=None):
    """Normalize, smooth, and differentiate a capacity series into curvature.

    The series must already sit on a uniform cycle grid (resample first if
    it does not). ``cfg`` defaults to a window scaled to the series length.
    """
    if not series.is_uniform:
        raise DomainError("series must be on a uniform cycle grid; resample first")
    if cfg is None:
        cfg = default_smoother_config(len(series))
    dt = series.grid_step
    y = normalize(series)
    _, d1, d2 = smooth_derivatives(y, dt, cfg, max_deriv=2)
    kappa = curvature_from_derivatives(d1, d2)
    return CurvatureSeries(cycle=series.cycle, kappa=kappa, dt=dt)
