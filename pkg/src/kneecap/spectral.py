"""Power spectral density estimation for the curvature series.

The estimators form one consistent stack. A window r(n) with normalization
constant C = sqrt(sum r(n)^2) turns the DFT X(k) = sum x(n) r(n) e^(-j2pi nk/N)
into the density S(k) = dt |X(k)/C|^2, whose two-sided sum times the bin
width df = 1/(N dt) is the signal power (Parseval). The periodogram is the
rectangular-window case, Bartlett's method averages periodograms over
non-overlapping segments, and Welch's method averages windowed densities
over overlapping segments. Densities are stored one-sided with interior
bins doubled; DC and (for even lengths) Nyquist are not doubled.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DegeneratePhaseError,
    DomainError,
    InsufficientDataError,
)

WINDOW_KINDS = ("rectangular", "hann")

MIN_SEGMENT = 4
MIN_PHASE_SAMPLES = 8


@dataclass(frozen=True)
class WindowSpec:
    """Window kind and length."""

    kind: str
    length: int

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ConfigurationError(f"kind must be one of {WINDOW_KINDS}, got {self.kind!r}")
        if self.length < 1:
            raise ConfigurationError(f"length must be >= 1, got {self.length}")
        if self.kind == "hann" and self.length < 3:
            # N=1 has no cosine argument; N=2 gives the all-zero window
            raise ConfigurationError(f"hann window needs length >= 3, got {self.length}")


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided power spectral density over frequency in cycle^-1."""

    freq: np.ndarray
    density: np.ndarray
    df: float
    dt: float
    total_power: float

    def __post_init__(self):
        f = np.asarray(self.freq, dtype=float)
        d = np.asarray(self.density, dtype=float)
        f.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "freq", f)
        object.__setattr__(self, "density", d)
        if len(f) != len(d):
            raise DomainError("freq and density must have equal length")

    def __len__(self):
        return len(self.freq)


def window_coefficients(spec):
    """Window samples r(n), n = 0..length-1."""
    n = spec.length
    if spec.kind == "rectangular":
        return np.ones(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / (n - 1)))


def normalization_constant(r):
    """C = sqrt(sum r(n)^2); the window's root energy."""
    r = np.asarray(r, dtype=float)
    c = float(np.sqrt(np.sum(r * r)))
    if c == 0.0:
        raise DomainError("window is identically zero")
    return c


def windowed_dft(x, r):
    """X(k) = sum_n x(n) r(n) e^(-j 2pi nk/N), k = 0..N-1."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if x.shape != r.shape:
        raise DomainError(f"length mismatch: x has {len(x)} samples, window has {len(r)}")
    return np.fft.fft(x * r)


def signal_energy(X, C, dt):
    """E = dt * sum_k |X(k)/C|^2."""
    if C <= 0:
        raise DomainError("C must be positive")
    X = np.asarray(X)
    return float(dt * np.sum(np.abs(X / C) ** 2))


def signal_power(X, C, N, dt):
    """P = E/(N dt) = (1/N) sum_k |X(k)/C|^2."""
    return signal_energy(X, C, dt) / (N * dt)


def _fold_one_sided(two_sided, M, dt):
    """One-sided density and frequency grid from a two-sided density."""
    kmax = M // 2
    density = two_sided[: kmax + 1].copy()
    if M % 2 == 0:
        density[1:kmax] *= 2.0
    else:
        density[1:] *= 2.0
    freq = np.arange(kmax + 1) / (M * dt)
    return freq, density


def _estimate_from_two_sided(two_sided, M, dt):
    df = 1.0 / (M * dt)
    total = float(np.sum(two_sided) * df)
    freq, density = _fold_one_sided(two_sided, M, dt)
    return PsdEstimate(freq=freq, density=density, df=df, dt=dt, total_power=total)


def psd_windowed(x, spec, dt=1.0):
    """Windowed PSD of a whole series: S(k) = dt |X(k)/C|^2, one segment."""
    x = np.asarray(x, dtype=float)
    if len(x) != spec.length:
        raise DomainError(
            f"series length {len(x)} does not match window length {spec.length}"
        )
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    r = window_coefficients(spec)
    C = normalization_constant(r)
    X = windowed_dft(x, r)
    two_sided = dt * np.abs(X / C) ** 2
    return _estimate_from_two_sided(two_sided, spec.length, dt)


def periodogram(x, dt=1.0):
    """S_N(k) = (1/N)|DFT x|^2, scaled by dt for density units."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    X = np.fft.fft(x)
    two_sided = dt * (np.abs(X) ** 2) / n
    return _estimate_from_two_sided(two_sided, n, dt)


def welch_psd(x, segment_len, overlap_fraction, kind="hann", dt=1.0, detrend=True):
    """Average of windowed segment densities over overlapping segments.

    Segments start every ``hop = max(1, round(segment_len*(1-overlap)))``
    samples; each is mean-removed (when ``detrend``) and windowed before
    its density is computed. Frequency resolution is 1/(segment_len*dt).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if segment_len < MIN_SEGMENT:
        raise ConfigurationError(f"segment_len must be >= {MIN_SEGMENT}, got {segment_len}")
    if segment_len > n:
        raise ConfigurationError(f"segment_len {segment_len} exceeds series length {n}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ConfigurationError(f"overlap_fraction must be in [0, 1), got {overlap_fraction}")
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    spec = WindowSpec(kind=kind, length=segment_len)
    r = window_coefficients(spec)
    C = normalization_constant(r)
    hop = max(1, round(segment_len * (1.0 - overlap_fraction)))
    acc = np.zeros(segment_len)
    count = 0
    for start in range(0, n - segment_len + 1, hop):
        seg = x[start : start + segment_len]
        if detrend:
            seg = seg - seg.mean()
        X = np.fft.fft(seg * r)
        acc += dt * np.abs(X / C) ** 2
        count += 1
    return _estimate_from_two_sided(acc / count, segment_len, dt)


def bartlett_psd(x, n_segments, dt=1.0):
    """Average periodogram over n_segments non-overlapping segments.

    The trailing ``len(x) mod n_segments`` samples are dropped. This is
    Welch's method with a rectangular window, zero overlap, and no
    detrending, and is computed through that same path.
    """
    x = np.asarray(x, dtype=float)
    if n_segments < 1:
        raise ConfigurationError(f"n_segments must be >= 1, got {n_segments}")
    seg_len = len(x) // n_segments
    if seg_len < MIN_SEGMENT:
        raise ConfigurationError(
            f"{n_segments} segments of {len(x)} samples leave length {seg_len} < {MIN_SEGMENT}"
        )
    return welch_psd(
        x[: seg_len * n_segments],
        seg_len,
        0.0,
        kind="rectangular",
        dt=dt,
        detrend=False,
    )


def default_segment_len(n):
    """Welch default: ~8 segments at 50% overlap, never below 8 samples."""
    return max(8, (2 * n) // 9)


@dataclass(frozen=True)
class WelchConfig:
    """Welch estimation parameters; segment_len None = scale to the input."""

    segment_len: int | None = None
    overlap: float = 0.5
    window: str = "hann"
    detrend: bool = True

    def __post_init__(self):
        if self.segment_len is not None and self.segment_len < MIN_SEGMENT:
            raise ConfigurationError(
                f"segment_len must be >= {MIN_SEGMENT}, got {self.segment_len}"
            )
        if not 0.0 <= self.overlap < 1.0:
            raise ConfigurationError(f"overlap must be in [0, 1), got {self.overlap}")
        if self.window not in WINDOW_KINDS:
            raise ConfigurationError(
                f"window must be one of {WINDOW_KINDS}, got {self.window!r}"
            )


def _phase_welch(kappa, cfg, dt):
    n = len(kappa)
    seg = cfg.segment_len if cfg.segment_len is not None else default_segment_len(n)
    seg = min(seg, n)
    return welch_psd(kappa, seg, cfg.overlap, kind=cfg.window, dt=dt, detrend=cfg.detrend)


def phase_psd(curv, part, cfg=None, skip_degenerate=False):
    """Welch PSD of the curvature series within each of the three phases.

    Returns a (phase1, phase2, phase3) tuple of PsdEstimate. A phase
    shorter than 8 samples raises a degenerate-phase error naming the
    phase, or yields None in its slot when ``skip_degenerate`` is set.
    A configured segment_len longer than a phase is shrunk to fit it.
    """
    if cfg is None:
        cfg = WelchConfig()
    kappa = curv.kappa
    estimates = []
    for phase_no, sl in enumerate(part.slices(len(kappa)), start=1):
        chunk = kappa[sl]
        if len(chunk) < MIN_PHASE_SAMPLES:
            if skip_degenerate:
                estimates.append(None)
                continue
            raise DegeneratePhaseError(
                f"phase {phase_no} has {len(chunk)} samples, need {MIN_PHASE_SAMPLES}",
                phase=phase_no,
            )
        estimates.append(_phase_welch(chunk, cfg, curv.dt))
    return tuple(estimates)
