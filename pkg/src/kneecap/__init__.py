"""Knee and knee-onset detection on battery capacity fade curves.

The pipeline: parse a per-cycle capacity series, smooth it and take an
approximated discrete curvature, locate the two regime boundaries with a
matrix-profile arc-crossing score, then characterize the three phases with
Welch spectral density estimates. A separate branch turns reference
performance test (RPT) voltage/capacity records into incremental-capacity
curves and tracks the largest dQ/dV peak across tests.
"""

__version__ = "0.1.0"

from .curvature import CurvatureSeries, approximate_curvature, curvature_from_derivatives
from .dataset_io import (
    CapacitySeries,
    RptRecord,
    capacity_series_to_csv,
    parse_capacity_csv,
    parse_rpt_csv,
    resample_uniform,
)
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    DegeneratePhaseError,
    DomainError,
    InsufficientDataError,
    KneecapError,
    ParseError,
)
from .ica import (
    IcCurve,
    Peak,
    PeakPoint,
    PeakTrack,
    incremental_capacity,
    largest_peak,
    peak_trajectory,
)
from .preprocess import (
    SmootherConfig,
    default_smoother_config,
    normalize,
    savgol_filter,
    smooth_derivatives,
)
from .segmentation import (
    MatrixProfile,
    PhasePartition,
    corrected_arc_curve,
    extract_regimes,
    identify_knee,
    matrix_profile,
)
from .spectral import (
    PsdEstimate,
    WelchConfig,
    WindowSpec,
    bartlett_psd,
    default_segment_len,
    normalization_constant,
    periodogram,
    phase_psd,
    psd_windowed,
    signal_energy,
    signal_power,
    welch_psd,
    window_coefficients,
    windowed_dft,
)

__all__ = [
    "__version__",
    "CapacitySeries",
    "RptRecord",
    "parse_capacity_csv",
    "parse_rpt_csv",
    "capacity_series_to_csv",
    "resample_uniform",
    "SmootherConfig",
    "default_smoother_config",
    "savgol_filter",
    "smooth_derivatives",
    "normalize",
    "CurvatureSeries",
    "curvature_from_derivatives",
    "approximate_curvature",
    "MatrixProfile",
    "PhasePartition",
    "matrix_profile",
    "corrected_arc_curve",
    "extract_regimes",
    "identify_knee",
    "WindowSpec",
    "WelchConfig",
    "PsdEstimate",
    "window_coefficients",
    "normalization_constant",
    "windowed_dft",
    "signal_energy",
    "signal_power",
    "psd_windowed",
    "periodogram",
    "welch_psd",
    "bartlett_psd",
    "default_segment_len",
    "phase_psd",
    "IcCurve",
    "Peak",
    "PeakPoint",
    "PeakTrack",
    "incremental_capacity",
    "largest_peak",
    "peak_trajectory",
    "KneecapError",
    "ParseError",
    "DomainError",
    "InsufficientDataError",
    "ConfigurationError",
    "DegenerateInputError",
    "DegeneratePhaseError",
]
