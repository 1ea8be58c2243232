"""Volatility inference for jump diffusions from equally spaced increments.

The pipeline simulates discretely observed jump-diffusion paths, detects
jump windows by magnitude thresholding, builds a temperature-corrected and
location-shifted conjugate posterior for the diffusion volatility, and ships
Monte Carlo machinery that verifies the method's calibration and normal
approximation numerically.
"""

from .diagnostics import (
    BvmRow,
    MseOracleResult,
    TruthSummary,
    bvm_convergence_check,
    mse_oracle,
    sandwich_variance,
    tv_distance,
)
from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DegenerateInferenceError,
    InsufficientDataError,
    JumpvolError,
    NumericError,
)
from .harness import (
    CoverageConfig,
    CoverageRow,
    ReplicationResult,
    run_coverage,
    run_replication,
    write_coverage_csv,
)
from .posterior import (
    KAPPA_FLOOR,
    CredibleInterval,
    GibbsPosterior,
    InverseGammaParams,
    ModifiedPosterior,
    NormalApprox,
    TruncatedPosterior,
    bvm_normal,
    compute_kappa,
    compute_mle,
    credible_interval,
    gibbs_update,
    mle_from_increments,
    modify_posterior,
    tempered_update,
)
from .seeds import derive_seed
from .simulate import (
    DiffusionSpec,
    FixedSize,
    IncrementData,
    JumpRealization,
    JumpSpec,
    PathTruth,
    SamplePath,
    SizeTable,
    TwoPointSizes,
    bin_jumps,
    increments_csv_text,
    read_increments_csv,
    simulate_jumps,
    simulate_path,
    simulate_path_given_jumps,
    write_increments_csv,
)
from .threshold import (
    QvEstimate,
    QvRateResult,
    ThresholdRule,
    estimate_jump_qv,
    interquartile_threshold,
    qv_error_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BvmRow",
    "ConfigurationError",
    "CoverageConfig",
    "CoverageRow",
    "CredibleInterval",
    "DegenerateDataError",
    "DegenerateInferenceError",
    "DiffusionSpec",
    "FixedSize",
    "GibbsPosterior",
    "IncrementData",
    "InsufficientDataError",
    "InverseGammaParams",
    "JumpRealization",
    "JumpSpec",
    "JumpvolError",
    "KAPPA_FLOOR",
    "ModifiedPosterior",
    "MseOracleResult",
    "NormalApprox",
    "NumericError",
    "PathTruth",
    "QvEstimate",
    "QvRateResult",
    "ReplicationResult",
    "SamplePath",
    "SizeTable",
    "ThresholdRule",
    "TruncatedPosterior",
    "TruthSummary",
    "TwoPointSizes",
    "bin_jumps",
    "bvm_convergence_check",
    "bvm_normal",
    "compute_kappa",
    "compute_mle",
    "credible_interval",
    "derive_seed",
    "estimate_jump_qv",
    "gibbs_update",
    "increments_csv_text",
    "interquartile_threshold",
    "mle_from_increments",
    "modify_posterior",
    "mse_oracle",
    "qv_error_rate",
    "read_increments_csv",
    "run_coverage",
    "run_replication",
    "sandwich_variance",
    "simulate_jumps",
    "simulate_path",
    "simulate_path_given_jumps",
    "tempered_update",
    "tv_distance",
    "write_coverage_csv",
    "write_increments_csv",
]
