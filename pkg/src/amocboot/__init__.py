"""Change-point inference for mean-shift time series with dependent errors.

Estimate the change location of a single mean shift by a weighted CUSUM
argmax, then build confidence intervals two independent ways: a circular
block bootstrap of the centered residuals, and the drifted-Wiener argmax
limit law scaled by an estimated long-run variance. A study harness
reproduces calibration (CoLe) and interval-length (CoIL) experiments over
AR(1) error configurations.
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .bootstrap import (
    BootstrapConfig,
    BootstrapDistribution,
    block_count,
    bootstrap_ci,
    bootstrap_distribution,
    bootstrap_quantiles,
    draw_offsets,
    reconstruct_series,
    resample_errors,
    write_bootstrap_csv,
)
from .cusum import ChangePointFit, CusumStatistics, compute_cusum, estimate_changepoint, fit_amoc
from .intervals import ConfidenceInterval, ZeroShiftError
from .limitdist import (
    BOUNDARY_HIT_LIMIT,
    GridTooSmallError,
    LimitLawConfig,
    LimitQuantileCache,
    LimitSamples,
    asymptotic_ci,
    drift_slope,
    empirical_quantile,
    quantile,
    simulate_argmax_samples,
    simulate_argmax_samples_scaled,
)
from .lrv import LrvEstimate, bartlett_lrv, default_window, split_autocovariance
from .model import (
    AmocSpec,
    Ar1Params,
    SeriesFormatError,
    TimeSeries,
    ar1_generate,
    make_amoc_series,
    read_series,
    write_series,
)
from .study import (
    CellKey,
    CoilDataset,
    ColeDataset,
    LimitLawTemplate,
    ReplicationRecord,
    StudyConfig,
    StudyConfigError,
    StudyResult,
    cole_statistic,
    coil_summaries,
    load_study_config,
    run_study,
    write_study_csvs,
)

__all__ = [
    "__version__",
    "backend_name",
    "AmocSpec",
    "Ar1Params",
    "SeriesFormatError",
    "TimeSeries",
    "ar1_generate",
    "make_amoc_series",
    "read_series",
    "write_series",
    "ChangePointFit",
    "CusumStatistics",
    "compute_cusum",
    "estimate_changepoint",
    "fit_amoc",
    "LrvEstimate",
    "bartlett_lrv",
    "default_window",
    "split_autocovariance",
    "ConfidenceInterval",
    "ZeroShiftError",
    "BOUNDARY_HIT_LIMIT",
    "GridTooSmallError",
    "LimitLawConfig",
    "LimitQuantileCache",
    "LimitSamples",
    "asymptotic_ci",
    "drift_slope",
    "empirical_quantile",
    "quantile",
    "simulate_argmax_samples",
    "simulate_argmax_samples_scaled",
    "BootstrapConfig",
    "BootstrapDistribution",
    "block_count",
    "bootstrap_ci",
    "bootstrap_distribution",
    "bootstrap_quantiles",
    "draw_offsets",
    "reconstruct_series",
    "resample_errors",
    "write_bootstrap_csv",
    "CellKey",
    "CoilDataset",
    "ColeDataset",
    "LimitLawTemplate",
    "ReplicationRecord",
    "StudyConfig",
    "StudyConfigError",
    "StudyResult",
    "cole_statistic",
    "coil_summaries",
    "load_study_config",
    "run_study",
    "write_study_csvs",
]
