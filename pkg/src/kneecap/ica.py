"""Incremental capacity (dQ/dV) curves and peak tracking across aging.

The capacity-vs-voltage curve of each reference performance test is
resampled onto a uniform voltage grid and differentiated with the
polynomial smoother. Peaks of dQ/dV mark electrode phase transitions;
the largest one is tracked across RPTs, since its amplitude rises while
the cell is healthy, saturates near the knee-onset, and falls toward
the knee.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InsufficientDataError
from .preprocess import SmootherConfig, savgol_filter

# Grid must cover at least this many steps for differentiation to make sense.
MIN_SPAN_STEPS = 50

DEFAULT_DV = 0.005


@dataclass(frozen=True)
class IcCurve:
    """dQ/dV on a uniform ascending voltage grid, for one RPT."""

    voltage_v: np.ndarray
    dq_dv: np.ndarray
    rpt_index: int
    cycle_at_rpt: float

    def __post_init__(self):
        v = np.asarray(self.voltage_v, dtype=float)
        d = np.asarray(self.dq_dv, dtype=float)
        v.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "voltage_v", v)
        object.__setattr__(self, "dq_dv", d)
        if len(v) != len(d):
            raise DomainError("voltage_v and dq_dv must have equal length")
        steps = np.diff(v)
        if len(steps) == 0 or steps.min() <= 0:
            raise DomainError("voltage grid must be ascending")

    def __len__(self):
        return len(self.voltage_v)

    @property
    def dv(self):
        return (self.voltage_v[-1] - self.voltage_v[0]) / (len(self.voltage_v) - 1)


class Peak(NamedTuple):
    """Largest dQ/dV peak; is_interior is False when the window held no
    strict local maximum and the windowed global maximum was used."""

    v_peak: float
    amplitude: float
    is_interior: bool


class PeakPoint(NamedTuple):
    rpt_index: int
    cycle_at_rpt: float
    v_peak: float
    amplitude: float
    is_interior: bool


@dataclass(frozen=True)
class PeakTrack:
    """Largest-peak location and amplitude per RPT, in rpt_index order."""

    records: tuple

    def __post_init__(self):
        idx = [r.rpt_index for r in self.records]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise DomainError("rpt_index must be strictly increasing")

    def __len__(self):
        return len(self.records)

    @property
    def amplitudes(self):
        return np.array([r.amplitude for r in self.records])

    @property
    def v_peaks(self):
        return np.array([r.v_peak for r in self.records])


def _ascending_strict(voltage, capacity):
    """Reorient to ascending voltage and drop non-advancing points."""
    v = np.asarray(voltage, dtype=float)
    q = np.asarray(capacity, dtype=float)
    if v[-1] < v[0]:
        v, q = v[::-1], q[::-1]
    keep_v, keep_q = [v[0]], [q[0]]
    for vi, qi in zip(v[1:], q[1:]):
        if vi > keep_v[-1]:
            keep_v.append(vi)
            keep_q.append(qi)
    return np.array(keep_v), np.array(keep_q)


def incremental_capacity(rpt, dv=DEFAULT_DV, cfg=None):
    """Differentiate Q(V) on a uniform grid of step dv.

    Q(V) is resampled by linear interpolation (splines could overshoot and
    break monotonicity) and differentiated by the polynomial smoother.
    Records whose capacity falls with rising voltage (cumulative discharge
    capacity) are sign-flipped so peaks come out positive.
    """
    if dv <= 0:
        raise DomainError("dv must be positive")
    if cfg is None:
        cfg = SmootherConfig(window_length=11, poly_order=3, max_deriv=2)
    v, q = _ascending_strict(rpt.voltage_v, rpt.capacity_ah)
    span = v[-1] - v[0]
    if span < MIN_SPAN_STEPS * dv:
        raise DomainError(
            f"voltage span {span:.4g} V below {MIN_SPAN_STEPS} grid steps of {dv:.4g} V"
        )
    count = int(np.floor(span / dv + 1e-9)) + 1
    grid = v[0] + dv * np.arange(count)
    q_grid = np.interp(grid, v, q)
    dq_dv = savgol_filter(q_grid, cfg, deriv=1, dt=dv)
    if q[-1] < q[0]:
        dq_dv = -dq_dv
    return IcCurve(
        voltage_v=grid,
        dq_dv=dq_dv,
        rpt_index=rpt.rpt_index,
        cycle_at_rpt=rpt.cycle_at_rpt,
    )


def largest_peak(ic, v_min=None, v_max=None):
    """Largest strict local maximum of dQ/dV within [v_min, v_max].

    Candidates are interior window points strictly greater than both grid
    neighbors; the largest wins, amplitude ties going to the lower
    voltage. When the window has no strict local maximum the windowed
    global maximum is returned with is_interior False.
    """
    v, d = ic.voltage_v, ic.dq_dv
    lo = 0 if v_min is None else int(np.searchsorted(v, v_min, side="left"))
    hi = len(v) if v_max is None else int(np.searchsorted(v, v_max, side="right"))
    if hi - lo < 3:
        raise DomainError(
            f"window [{v_min}, {v_max}] covers {hi - lo} grid points, need >= 3"
        )
    win = d[lo:hi]
    interior = (win[1:-1] > win[:-2]) & (win[1:-1] > win[2:])
    candidates = np.flatnonzero(interior) + 1
    if len(candidates):
        best = candidates[np.argmax(win[candidates])]
        return Peak(float(v[lo + best]), float(win[best]), True)
    best = int(np.argmax(win))
    return Peak(float(v[lo + best]), float(win[best]), False)


def peak_trajectory(rpts, dv=DEFAULT_DV, cfg=None, v_min=None, v_max=None):
    """Largest peak of every RPT's IC curve, ordered by rpt_index."""
    rpts = list(rpts)
    if len(rpts) < 2:
        raise InsufficientDataError(f"need at least 2 RPTs, got {len(rpts)}")
    rpts.sort(key=lambda r: r.rpt_index)
    if any(b.rpt_index == a.rpt_index for a, b in zip(rpts, rpts[1:])):
        raise DomainError("duplicate rpt_index in RPT sequence")
    records = []
    for rpt in rpts:
        ic = incremental_capacity(rpt, dv=dv, cfg=cfg)
        peak = largest_peak(ic, v_min=v_min, v_max=v_max)
        records.append(
            PeakPoint(rpt.rpt_index, rpt.cycle_at_rpt, peak.v_peak, peak.amplitude, peak.is_interior)
        )
    return PeakTrack(records=tuple(records))
