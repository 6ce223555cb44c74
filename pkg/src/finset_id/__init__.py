"""Identification of an LTI system from a finite set of candidate models."""

from .bounds import (
    BoundReport,
    CovarianceSeries,
    bmsb_params,
    chi_square_risk_threshold,
    corollary1_bound,
    excitation_gramians,
    residual_covariance,
    snr_trace,
    state_covariance,
    theorem1_check,
    theorem1_minimal_T,
    theorem2_lhs,
    theorem2_minimal_T,
    verify_anticoncentration,
)
from .estimators import (
    EstimateOutcome,
    empirical_risk,
    mle_estimate,
    ols_project_estimate,
    transition_cost,
)
from .exceptions import (
    ConfigInvalid,
    DimensionMismatch,
    EmptyTrajectory,
    FinsetError,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    UnknownExperiment,
)
from .experiments import (
    ExperimentConfig,
    TrialTable,
    builtin_paper_config,
    load_config,
    run_bounds,
    run_montecarlo,
)
from .linalg_stats import CholeskyFactor, RngState, cholesky, least_squares, sample_gaussian, spectral_norm
from .lti import HypothesisSet, NoiseConfig, SystemParams, Trajectory, simulate, simulate_batch, transitions

__version__ = "0.1.0"
