"""Ingestion of per-cycle capacity logs and RPT voltage-capacity curves.

Two CSV schemas are supported:

* capacity log: header ``cycle,capacity_ah``, one row per cycle
* RPT curve:    header ``voltage_v,capacity_ah``, cumulative capacity along
  the charge or discharge direction

Anything else (vendor cycler exports, databases) has to be converted by the
caller first.
"""

import io
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InsufficientDataError, ParseError

MIN_CAPACITY_ROWS = 8
MIN_RPT_ROWS = 16

# Relative gap spread below which a cycle grid counts as uniform.
UNIFORM_GAP_RTOL = 1e-9

# Voltage backsteps up to this size (V) are tolerated as sensor jitter;
# larger excursions against the sweep direction are rejected.
VOLTAGE_MONOTONE_TOL = 5e-3

DIRECTIONS = ("charge", "discharge")


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _uniform_gaps(cycle):
    gaps = np.diff(cycle)
    return (gaps.max() - gaps.min()) < UNIFORM_GAP_RTOL * gaps.mean()


@dataclass(frozen=True)
class CapacitySeries:
    """Per-cycle capacity measurements of one cell."""

    cell_id: str
    cycle: np.ndarray
    capacity_ah: np.ndarray
    nominal_capacity_ah: float
    is_uniform: bool = field(default=False)

    def __post_init__(self):
        cycle = _readonly(self.cycle)
        cap = _readonly(self.capacity_ah)
        object.__setattr__(self, "cycle", cycle)
        object.__setattr__(self, "capacity_ah", cap)
        if len(cycle) != len(cap):
            raise DomainError("cycle and capacity_ah must have equal length")
        if len(cycle) < MIN_CAPACITY_ROWS:
            raise InsufficientDataError(
                f"need at least {MIN_CAPACITY_ROWS} samples, got {len(cycle)}"
            )
        if cycle[0] < 0:
            raise DomainError("cycle numbers must be non-negative")
        if np.any(np.diff(cycle) <= 0):
            raise DomainError("cycle numbers must be strictly increasing")
        if np.any(cap <= 0):
            raise DomainError("capacity values must be positive")
        if self.nominal_capacity_ah <= 0:
            raise DomainError("nominal capacity must be positive")
        if self.is_uniform and not _uniform_gaps(cycle):
            raise DomainError("is_uniform set but cycle gaps are not uniform")

    def __len__(self):
        return len(self.cycle)

    @property
    def grid_step(self):
        """Mean cycle gap; only meaningful when is_uniform."""
        return (self.cycle[-1] - self.cycle[0]) / (len(self.cycle) - 1)


@dataclass(frozen=True)
class RptRecord:
    """One reference performance test: voltage vs cumulative capacity."""

    rpt_index: int
    cycle_at_rpt: float
    voltage_v: np.ndarray
    capacity_ah: np.ndarray
    direction: str

    def __post_init__(self):
        v = _readonly(self.voltage_v)
        q = _readonly(self.capacity_ah)
        object.__setattr__(self, "voltage_v", v)
        object.__setattr__(self, "capacity_ah", q)
        if self.direction not in DIRECTIONS:
            raise DomainError(f"direction must be one of {DIRECTIONS}")
        if self.rpt_index < 0:
            raise DomainError("rpt_index must be non-negative")
        if self.cycle_at_rpt < 0:
            raise DomainError("cycle_at_rpt must be non-negative")
        if len(v) != len(q):
            raise DomainError("voltage_v and capacity_ah must have equal length")
        if len(v) < MIN_RPT_ROWS:
            raise InsufficientDataError(
                f"need at least {MIN_RPT_ROWS} samples, got {len(v)}"
            )
        dv = np.diff(v)
        if self.direction == "charge" and np.any(dv < -VOLTAGE_MONOTONE_TOL):
            raise DomainError("voltage not monotone non-decreasing for charge")
        if self.direction == "discharge" and np.any(dv > VOLTAGE_MONOTONE_TOL):
            raise DomainError("voltage not monotone non-increasing for discharge")

    def __len__(self):
        return len(self.voltage_v)


def _decode_lines(source):
    """Decode a byte stream (bytes or binary file-like) into CSV lines."""
    if hasattr(source, "read"):
        raw = source.read()
    else:
        raw = source
    if isinstance(raw, str):
        text = raw
    else:
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc}") from None
    if text.startswith("\ufeff"):
        text = text[1:]
    return text.splitlines()


def _parse_two_column_csv(source, header):
    """Shared two-column CSV reader. Returns (rows, line_numbers)."""
    lines = _decode_lines(source)
    if not lines:
        raise ParseError("empty input", line=1)
    if lines[0].strip() != header:
        raise ParseError(f"expected header '{header}', got '{lines[0].strip()}'", line=1)
    rows, line_nos = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 columns, got {len(parts)}", line=lineno)
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric value in '{line.strip()}'", line=lineno) from None
        rows.append((a, b))
        line_nos.append(lineno)
    return rows, line_nos


def parse_capacity_csv(source, cell_id, nominal_capacity_ah):
    """Parse a ``cycle,capacity_ah`` CSV into a CapacitySeries.

    Rows are sorted by cycle; exact-duplicate cycle numbers keep the last
    occurrence in file order (re-logged cycles overwrite earlier ones).
    """
    rows, line_nos = _parse_two_column_csv(source, "cycle,capacity_ah")
    for (cyc, cap), lineno in zip(rows, line_nos):
        if cyc < 0:
            raise DomainError(f"line {lineno}: negative cycle number {cyc}")
        if cap <= 0:
            raise DomainError(f"line {lineno}: capacity must be positive, got {cap}")
    if len(rows) < MIN_CAPACITY_ROWS:
        raise InsufficientDataError(
            f"need at least {MIN_CAPACITY_ROWS} data rows, got {len(rows)}"
        )
    # stable sort, then keep the last row for each duplicated cycle number
    order = sorted(range(len(rows)), key=lambda i: rows[i][0])
    dedup = {}
    for i in order:
        dedup[rows[i][0]] = rows[i][1]
    cycle = np.array(list(dedup.keys()))
    cap = np.array(list(dedup.values()))
    if len(cycle) < MIN_CAPACITY_ROWS:
        raise InsufficientDataError(
            f"fewer than {MIN_CAPACITY_ROWS} distinct cycles after deduplication"
        )
    return CapacitySeries(
        cell_id=cell_id,
        cycle=cycle,
        capacity_ah=cap,
        nominal_capacity_ah=float(nominal_capacity_ah),
        is_uniform=_uniform_gaps(cycle),
    )


def capacity_series_to_csv(series):
    """Serialize back to the ingestion schema (17 significant digits)."""
    buf = io.StringIO()
    buf.write("cycle,capacity_ah\n")
    for c, q in zip(series.cycle, series.capacity_ah):
        buf.write(f"{c:.17g},{q:.17g}\n")
    return buf.getvalue().encode("utf-8")


def parse_rpt_csv(source, rpt_index, cycle_at_rpt, direction):
    """Parse a ``voltage_v,capacity_ah`` CSV into an RptRecord.

    Runs of exactly repeated voltages are collapsed into one row with the
    mean of their capacities (CV holds produce such runs).
    """
    rows, _ = _parse_two_column_csv(source, "voltage_v,capacity_ah")
    if len(rows) < MIN_RPT_ROWS:
        raise InsufficientDataError(
            f"need at least {MIN_RPT_ROWS} data rows, got {len(rows)}"
        )
    volts, caps = [], []
    for v, q in rows:
        if volts and v == volts[-1]:
            # average capacities across the duplicate-voltage run
            caps[-1][0] += q
            caps[-1][1] += 1
        else:
            volts.append(v)
            caps.append([q, 1])
    voltage = np.array(volts)
    capacity = np.array([s / n for s, n in caps])
    return RptRecord(
        rpt_index=int(rpt_index),
        cycle_at_rpt=float(cycle_at_rpt),
        voltage_v=voltage,
        capacity_ah=capacity,
        direction=direction,
    )


def resample_uniform(series, grid_step):
    """Resample a capacity series onto a uniform cycle grid.

    Fits a natural cubic spline through (cycle, capacity) and evaluates it
    on ``cycle[0], cycle[0]+grid_step, ...`` up to the last cycle. A series
    that is already uniform at the requested step comes back unchanged up
    to floating-point roundoff at the shared grid points.
    """
    if grid_step <= 0:
        raise DomainError("grid_step must be positive")
    span = series.cycle[-1] - series.cycle[0]
    if grid_step > span:
        raise DomainError(f"grid_step {grid_step} exceeds total span {span}")
    spline = CubicSpline(series.cycle, series.capacity_ah, bc_type="natural")
    count = int(np.floor(span / grid_step + 1e-9)) + 1
    grid = series.cycle[0] + grid_step * np.arange(count)
    values = spline(grid)
    return CapacitySeries(
        cell_id=series.cell_id,
        cycle=grid,
        capacity_ah=values,
        nominal_capacity_ah=series.nominal_capacity_ah,
        is_uniform=True,
    )
