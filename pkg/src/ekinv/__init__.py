"""Ensemble Kalman inversion for PDE-constrained inverse problems.

The package provides the discrete perturbed-observation iteration, its
continuous-time limits, exact linear-case diagnostics built on the
deviation Gram matrices, two elliptic FEM forward models with spectral
Gaussian priors, the inflation/localization/randomized-search variants,
and a config-driven experiment runner.
"""
from .analysis import (
    DeviationMatrices,
    ResidualSplit,
    SpectralE,
    analytic_E,
    analytic_L,
    check_maximal_dimension,
    collapse_rate_fit,
    deviation_matrices,
    mapped_deviations,
    matrix_ode_rhs,
    residual_split,
    split_observation_vectors,
)
from .discrete import DiscreteConfig, enkf_update, run_discrete, subspace_distance
from .experiments import (
    PRESETS,
    ConfigError,
    ExperimentConfig,
    RunRecord,
    StoppingRule,
    build_linear1d,
    build_nonlinear2d,
    default_discrepancy_tau,
    emit_outputs,
    load_config,
    parse_config,
    preset_config,
    run_experiment,
    stop_bayesian,
    stop_discrepancy,
)
from .fem1d import Fem1DLinear, Mesh1D, assemble_fem_1d, linear_forward
from .fem2d import Fem2DNonlinear, bilaplacian_prior_2d, nonlinear_forward_2d
from .flow import (
    FlowConfig,
    Scheme,
    drift_general,
    drift_linear_gradflow,
    integrate,
)
from .model import (
    BlowUpError,
    EkinvError,
    Ensemble,
    ForwardEvaluationError,
    ForwardMap,
    InverseProblem,
    NoiseModel,
    SigmaMode,
    cov_pp,
    cov_up,
    empirical_cov,
    ensemble_mean,
    evaluate_ensemble,
    misfit_phi,
    misfit_theta,
)
from .priors import (
    PriorKind,
    PriorSpec,
    adaptive_first_member,
    brownian_bridge_prior,
    kl_initial_ensemble,
)
from .trajectory import Trajectory
from .variants import (
    InflationConfig,
    LocalizationConfig,
    PcnConfig,
    diffusion_limit_run,
    diffusion_limit_step,
    inflated_drift,
    inflated_drift_fd,
    localized_cov,
    localized_drift,
    pcn_acceptance,
    pcn_step,
    randomized_search_run,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
