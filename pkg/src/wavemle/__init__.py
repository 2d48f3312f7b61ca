"""Spectral simulation and wave-speed inference for a noise-driven wave field.

The field on (0, pi) with Dirichlet boundaries decomposes into independent
noise-driven oscillator modes; this package samples those modes on a uniform
time grid (explicit scheme and exact Gaussian transition), computes the
discretized maximum-likelihood estimate of the wave-speed parameter from the
observed modes, and runs seeded Monte-Carlo campaigns that check consistency,
asymptotic normality, and discretization rates against closed-form moments.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataIntegrityError,
    DegenerateDataError,
    SizingError,
    WavemleError,
)
from .moments import (
    ModeContext,
    cov_u,
    fisher_asymptotic,
    fisher_exact,
    integrated_mean_square_u,
    mean_square_u,
    mean_square_v,
    upsilon,
)
from .sim import (
    FieldSlice,
    SimConfig,
    TrajectorySet,
    reconstruct_field,
    simulate,
    simulate_euler,
    simulate_exact,
    transition_chol,
    transition_cov,
)
from .estimator import (
    Estimate,
    SufficientStats,
    identity_residual,
    mle,
    mode_statistics,
    normalized_errors,
    sufficient_statistics,
    z_scores,
)
from .stats import (
    Histogram,
    KsResult,
    SampleSummary,
    histogram,
    kolmogorov_survival,
    ks_test,
    std_normal_cdf,
    summarize,
)
from .experiments import (
    REPORT_SCHEMA_VERSION,
    CampaignSpec,
    ExperimentReport,
    ReplicationRecord,
    run_campaign,
    run_consistency_sweep,
    run_normality,
    run_rate_check,
)
from .io import (
    TRAJECTORY_FORMAT_VERSION,
    read_trajectory,
    write_report,
    write_trajectory,
)

__all__ = [
    "__version__",
    "WavemleError", "ConfigError", "SizingError", "DataIntegrityError", "DegenerateDataError",
    "ModeContext", "mean_square_u", "mean_square_v", "cov_u", "integrated_mean_square_u",
    "fisher_exact", "fisher_asymptotic", "upsilon",
    "SimConfig", "TrajectorySet", "FieldSlice", "simulate", "simulate_euler", "simulate_exact",
    "reconstruct_field", "transition_cov", "transition_chol",
    "SufficientStats", "Estimate", "sufficient_statistics", "mode_statistics", "mle",
    "normalized_errors", "identity_residual", "z_scores",
    "KsResult", "SampleSummary", "Histogram", "std_normal_cdf", "kolmogorov_survival",
    "ks_test", "summarize", "histogram",
    "CampaignSpec", "ReplicationRecord", "ExperimentReport", "REPORT_SCHEMA_VERSION",
    "run_campaign", "run_consistency_sweep", "run_normality", "run_rate_check",
    "TRAJECTORY_FORMAT_VERSION", "read_trajectory", "write_trajectory", "write_report",
]
