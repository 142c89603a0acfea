"""Capacity normalization and least-squares polynomial smoothing.

The smoother is a Savitzky-Golay filter with polynomial boundary handling:
every output sample, including the first and last half-window, is the value
(or derivative) of a degree-``poly_order`` polynomial fitted to a full
window of input samples. Interior samples use the window centred on them;
edge samples reuse the first or last full window and evaluate the fit
off-centre, so no padding values are ever invented.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import ConfigurationError

MAX_DEFAULT_WINDOW = 101


@dataclass(frozen=True)
class SmootherConfig:
    """Window, polynomial order, and highest derivative for the smoother."""

    window_length: int = 11
    poly_order: int = 3
    max_deriv: int = 2

    def __post_init__(self):
        if self.window_length < 1 or self.window_length % 2 == 0:
            raise ConfigurationError(
                f"window_length must be odd and positive, got {self.window_length}"
            )
        if self.poly_order < 0:
            raise ConfigurationError(f"poly_order must be >= 0, got {self.poly_order}")
        if self.window_length < self.poly_order + 1:
            raise ConfigurationError(
                f"window_length {self.window_length} must be >= poly_order + 1"
            )
        if self.max_deriv not in (0, 1, 2):
            raise ConfigurationError(f"max_deriv must be 0, 1 or 2, got {self.max_deriv}")
        if self.poly_order < self.max_deriv:
            raise ConfigurationError(
                f"poly_order {self.poly_order} must be >= max_deriv {self.max_deriv}"
            )


def default_smoother_config(n):
    """Window scaled to series length: ~10% of samples, odd, in [11, 101]."""
    w = max(11, int(round(0.1 * n)))
    w = min(w, MAX_DEFAULT_WINDOW)
    if w % 2 == 0:
        w += 1
    if w > n:
        # very short series: fall back to the widest window that fits
        w = n if n % 2 == 1 else n - 1
    return SmootherConfig(window_length=w, poly_order=min(3, w - 1), max_deriv=2)


@lru_cache(maxsize=256)
def _sg_weights(window_length, poly_order, deriv, pos):
    """Least-squares convolution weights for one output position.

    Parameters
    ----------
    window_length : int
        Odd number of samples in the fit window.
    poly_order : int
        Degree of the fitted polynomial.
    deriv : int
        Derivative order to evaluate (0 = smoothed value).
    pos : int
        Evaluation offset from the window centre, in samples. 0 for
        interior points; negative/positive when an edge sample reuses the
        first/last full window.

    Returns
    -------
    ndarray of shape (window_length,)
        Weights ``w`` such that ``w @ y_window`` equals the ``deriv``-th
        derivative (per unit sample spacing) at the requested offset of
        the polynomial least-squares fit to ``y_window``.

    Notes
    -----
    The window abscissa is rescaled to [-1, 1] before building the
    Vandermonde matrix, which keeps the normal equations well conditioned
    for the window sizes used here (scipy's savgol_coeffs applies the same
    trick). The fit itself is computed through a pseudoinverse of the
    rescaled Vandermonde matrix; evaluation at offset ``pos`` then chains
    through the rescaling, contributing a factor ``h**-deriv`` with
    ``h = (window_length - 1) / 2``.
    """
    if window_length == 1:
        w = np.array([1.0]) if deriv == 0 else np.array([0.0])
        w.flags.writeable = False
        return w
    h = (window_length - 1) // 2
    if abs(pos) > h:
        raise ConfigurationError(f"offset {pos} outside window half-width {h}")
    if deriv > poly_order:
        # fitted polynomial is identically zero at this derivative order
        w = np.zeros(window_length)
        w.flags.writeable = False
        return w
    t = (np.arange(window_length) - h) / h
    vander = np.vander(t, poly_order + 1, increasing=True)
    proj = np.linalg.pinv(vander)
    t0 = pos / h
    eval_vec = np.zeros(poly_order + 1)
    for j in range(deriv, poly_order + 1):
        eval_vec[j] = (factorial(j) // factorial(j - deriv)) * t0 ** (j - deriv)
    w = (eval_vec @ proj) / float(h) ** deriv
    w.flags.writeable = False
    return w


def savgol_filter(y, config, deriv=0, dt=1.0):
    """Savitzky-Golay filter with full-window polynomial edge handling.

    Returns the ``deriv``-th derivative of the local polynomial fit at
    every sample, scaled for sample spacing ``dt``. Output length equals
    input length.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ConfigurationError("input must be one-dimensional")
    if deriv < 0 or deriv > config.max_deriv:
        raise ConfigurationError(
            f"deriv must be in [0, max_deriv={config.max_deriv}], got {deriv}"
        )
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    w, p = config.window_length, config.poly_order
    n = len(y)
    if n < w:
        raise ConfigurationError(f"series length {n} shorter than window {w}")
    h = (w - 1) // 2
    out = np.empty(n)
    centre = _sg_weights(w, p, deriv, 0)
    out[h : n - h] = np.correlate(y, centre, mode="valid")
    first, last = y[:w], y[n - w :]
    for i in range(h):
        out[i] = _sg_weights(w, p, deriv, i - h) @ first
        out[n - 1 - i] = _sg_weights(w, p, deriv, h - i) @ last
    if deriv:
        out /= dt**deriv
    return out


def smooth_derivatives(y, dt, config, max_deriv):
    """Stack of smoothed derivatives, orders 0..max_deriv, shape (d+1, n)."""
    if max_deriv < 0 or max_deriv > config.max_deriv:
        raise ConfigurationError(
            f"max_deriv must be in [0, config.max_deriv={config.max_deriv}]"
        )
    return np.vstack(
        [savgol_filter(y, config, deriv=d, dt=dt) for d in range(max_deriv + 1)]
    )


def normalize(series):
    """Capacity divided by nameplate capacity (dimensionless, ~1 when new)."""
    return series.capacity_ah / series.nominal_capacity_ah
