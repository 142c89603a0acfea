"""Regime-boundary detection on the curvature series.

The pipeline is the FLUSS construction: build a matrix profile (each
length-m subsequence's z-normalized Euclidean distance to its nearest
non-trivial neighbor), count how many nearest-neighbor arcs cross each
location, normalize that count by the idealized parabolic count expected
when neighbors are unstructured, and take the minima of the corrected arc
curve as regime boundaries. On a capacity fade curve's curvature the two
boundaries are the knee-onset and the knee.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.fft import irfft, rfft

from .errors import ConfigurationError, DegenerateInputError, DomainError

# Subsequences whose std is below FLAT_RTOL * series scale are treated as
# flat: z-normalization would amplify noise by ~1/std past this point.
FLAT_RTOL = 1e-12

# Default spacing between extracted regime boundaries, in units of m.
REGIME_SPACING_FACTOR = 5

MIN_SUBSEQUENCE = 4


@dataclass(frozen=True)
class MatrixProfile:
    """Nearest non-trivial neighbor distance and index per subsequence."""

    distances: np.ndarray
    indices: np.ndarray
    m: int
    exclusion: int

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        i = np.asarray(self.indices, dtype=np.int64)
        d.flags.writeable = False
        i.flags.writeable = False
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "indices", i)
        if len(d) != len(i):
            raise DomainError("distances and indices must have equal length")

    def __len__(self):
        return len(self.distances)


@dataclass(frozen=True)
class PhasePartition:
    """Knee-onset and knee indices splitting life into phases 1/2/3.

    Phase 1 is [0, onset_index), phase 2 is [onset_index, knee_index),
    phase 3 is [knee_index, end].
    """

    onset_index: int
    knee_index: int
    onset_cycle: float
    knee_cycle: float
    cac: np.ndarray

    def __post_init__(self):
        cac = np.asarray(self.cac, dtype=float)
        cac.flags.writeable = False
        object.__setattr__(self, "cac", cac)
        if not 0 < self.onset_index < self.knee_index:
            raise DomainError("need 0 < onset_index < knee_index")

    def slices(self, n):
        """Phase slices of a length-n series aligned with the curvature grid."""
        return (
            slice(0, self.onset_index),
            slice(self.onset_index, self.knee_index),
            slice(self.knee_index, n),
        )


def _sliding_stats(x, m):
    windows = np.lib.stride_tricks.sliding_window_view(x, m)
    return windows.mean(axis=1), windows.std(axis=1)


def _row_distances(x_pad_fft, x, m, i, mu, sd, flat, fft_len):
    """Distances from subsequence i to all subsequences, before masking."""
    q = x[i : i + m][::-1]
    qt = irfft(x_pad_fft * rfft(q, fft_len), fft_len)[m - 1 : len(x)]
    cap = 2.0 * np.sqrt(m)
    if flat[i]:
        d = np.where(flat, 0.0, cap)
        return d
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (qt - m * mu[i] * mu) / (m * sd[i] * sd)
        d = np.sqrt(np.maximum(2.0 * m * (1.0 - rho), 0.0))
    d[flat] = cap
    return np.minimum(d, cap)


def matrix_profile(x, m, exclusion=None, n_jobs=1):
    """Z-normalized nearest-neighbor distance profile of all subsequences.

    For each start i, ``distances[i]`` is the smallest z-normalized
    Euclidean distance from ``x[i:i+m]`` to any ``x[j:j+m]`` with
    ``|j - i| > exclusion``, and ``indices[i]`` is that j (ties broken
    toward the smallest j). Sliding dot products are computed per row with
    an FFT; rows are independent, so results are identical for any
    ``n_jobs``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if m < MIN_SUBSEQUENCE or 2 * m > n:
        raise ConfigurationError(f"need {MIN_SUBSEQUENCE} <= m <= len(x)/2, got m={m}, len={n}")
    if exclusion is None:
        exclusion = int(np.ceil(m / 2))
    if exclusion < 1:
        raise ConfigurationError(f"exclusion must be >= 1, got {exclusion}")
    scale = float(np.std(x))
    if scale == 0.0:
        raise DegenerateInputError("series is constant; all subsequences are flat")
    # a large common offset makes qt - m*mu_i*mu_j cancel catastrophically;
    # removing the global mean leaves every z-normalized distance unchanged
    x = x - x.mean()
    L = n - m + 1
    mu, sd = _sliding_stats(x, m)
    flat = sd < FLAT_RTOL * scale
    if flat.all():
        raise DegenerateInputError("all subsequences are flat at the given m")
    fft_len = 1 << int(np.ceil(np.log2(n + m - 1)))
    x_pad_fft = rfft(x, fft_len)

    distances = np.empty(L)
    indices = np.empty(L, dtype=np.int64)

    def solve_row(i):
        d = _row_distances(x_pad_fft, x, m, i, mu, sd, flat, fft_len)
        lo, hi = max(0, i - exclusion), min(L, i + exclusion + 1)
        d[lo:hi] = np.inf
        j = int(np.argmin(d))
        return d[j], j

    if n_jobs == 1:
        for i in range(L):
            distances[i], indices[i] = solve_row(i)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            for i, (dist, j) in enumerate(pool.map(solve_row, range(L))):
                distances[i] = dist
                indices[i] = j
    if not np.all(np.isfinite(distances)):
        raise ConfigurationError(
            "exclusion zone leaves some subsequence with no admissible neighbor"
        )
    return MatrixProfile(distances=distances, indices=indices, m=m, exclusion=exclusion)


def corrected_arc_curve(mp):
    """Arc-crossing counts normalized by the idealized parabolic count.

    ``AC[k]`` counts nearest-neighbor pairs (i, indices[i]) whose arc
    strictly crosses location k. The corrected curve divides by the count
    expected from unstructured neighbors, IAC[k] = 2k(L-k)/L, and clamps
    to [0, 1]; the first and last m entries are forced to 1 to suppress
    edge artifacts. Regime boundaries appear as minima.
    """
    idx = mp.indices
    L = len(idx)
    pos = np.arange(L, dtype=np.int64)
    a = np.minimum(pos, idx)
    b = np.maximum(pos, idx)
    spans = b - a >= 2
    diff = np.zeros(L + 1)
    np.add.at(diff, a[spans] + 1, 1.0)
    np.add.at(diff, b[spans], -1.0)
    ac = np.cumsum(diff)[:L]
    k = np.arange(L, dtype=float)
    iac = 2.0 * k * (L - k) / L
    with np.errstate(divide="ignore", invalid="ignore"):
        cac = np.where(iac > 0, ac / iac, 1.0)
    cac = np.minimum(cac, 1.0)
    m = min(mp.m, L)
    cac[:m] = 1.0
    cac[L - m :] = 1.0
    return cac


def extract_regimes(cac, n_boundaries, exclusion):
    """Iteratively pick CAC global minima, masking ±exclusion around each.

    Returns the boundary indices sorted ascending. Ties at the minimum go
    to the smallest index.
    """
    cac = np.asarray(cac, dtype=float)
    if n_boundaries < 1:
        raise ConfigurationError(f"n_boundaries must be >= 1, got {n_boundaries}")
    if exclusion < 1:
        raise ConfigurationError(f"exclusion must be >= 1, got {exclusion}")
    if len(cac) < (n_boundaries + 1) * exclusion:
        raise ConfigurationError(
            f"series of length {len(cac)} too short for {n_boundaries} boundaries "
            f"with exclusion {exclusion}"
        )
    work = cac.copy()
    found = []
    for _ in range(n_boundaries):
        if not np.isfinite(work).any():
            raise ConfigurationError(
                "arc curve exhausted before all boundaries were found; "
                "reduce exclusion or n_boundaries"
            )
        k = int(np.argmin(work))
        found.append(k)
        work[max(0, k - exclusion) : k + exclusion + 1] = np.inf
    return sorted(found)


def identify_knee(curv, m=None, exclusion=None, regime_exclusion=None, n_jobs=1):
    """Locate knee-onset and knee as the two regime boundaries of curvature.

    Composes matrix_profile, corrected_arc_curve, and extract_regimes with
    two boundaries; the earlier boundary is the knee-onset, the later the
    knee. ``m`` defaults to ~1/20 of the series length, clamped to
    [10, 100]; ``regime_exclusion`` (spacing between the two extracted
    minima) defaults to 5*m, shrunk to a third of the profile length when
    the series is short.
    """
    kappa = curv.kappa
    n = len(kappa)
    if m is None:
        m = int(np.clip(round(n / 20), 10, 100))
    if n < 4 * m:
        raise ConfigurationError(f"need len(curvature) >= 4*m, got {n} < {4 * m}")
    spread = np.ptp(kappa)
    if spread <= 1e-9 * max(1.0, float(np.max(np.abs(kappa)))):
        raise DegenerateInputError(
            "curvature is effectively constant; no knee detectable"
        )
    mp = matrix_profile(kappa, m, exclusion=exclusion, n_jobs=n_jobs)
    cac = corrected_arc_curve(mp)
    if regime_exclusion is None:
        regime_exclusion = max(1, min(REGIME_SPACING_FACTOR * m, len(cac) // 3))
    onset, knee = (int(b) for b in extract_regimes(cac, 2, regime_exclusion))
    if not 0 < onset < knee < n - 1:
        raise DegenerateInputError(
            f"boundaries ({onset}, {knee}) do not split the series into three phases"
        )
    return PhasePartition(
        onset_index=onset,
        knee_index=knee,
        onset_cycle=float(curv.cycle[onset]),
        knee_cycle=float(curv.cycle[knee]),
        cac=cac,
    )
