"""kieferlab: simulation and verification of empirical-process asymptotics
for weakly dependent sequences, built around the dyadic block construction
of the approximating Kiefer process."""

__version__ = "0.1.0"

from .config import ExperimentConfig, RunConfig, parse_config, preset, render_config
from .covariance import (
    LambdaEstimate,
    PsdFactor,
    default_max_lag,
    estimate_lambda,
    psd_factor,
    restrict_lambda,
)
from .dependence import (
    BetaEstimate,
    DecayFit,
    beta_noise_floor,
    decay_profile_fit,
    estimate_beta,
    fit_decay,
    independence_noise_floor,
    lag_covariance,
    lag_covariance_profile,
)
from .dynamics import ProcessSpec, Trajectory, generate_trajectory, lsv_apply
from .empirical import (
    BlockSchedule,
    BlockSumSample,
    DyadicGrid,
    EcdfModel,
    EmpiricalField,
    block_schedule,
    block_sums,
    dyadic_projection,
    ecdf,
    ecdf_eval,
    empirical_process,
    first_block_vector,
    schedule_bracketing,
)
from .errors import ConfigError, EstimationError, FactorizationError
from .experiments import (
    ExperimentReport,
    RateFit,
    StatRow,
    boundary_degeneracy,
    clt_marginals,
    lil_envelope,
    rates_report,
    run_suite,
    variance_growth,
)
from .gaussian import KieferPath, simulate_kiefer
from .seeding import derive_seed, generator
from .transport import (
    CouplingReport,
    coupling_scaling,
    supnorm_cost,
    wasserstein_empirical,
    wasserstein_oracle,
)

__all__ = [
    "__version__",
    "BetaEstimate",
    "BlockSchedule",
    "BlockSumSample",
    "ConfigError",
    "CouplingReport",
    "DecayFit",
    "DyadicGrid",
    "EcdfModel",
    "EmpiricalField",
    "EstimationError",
    "ExperimentConfig",
    "ExperimentReport",
    "FactorizationError",
    "KieferPath",
    "LambdaEstimate",
    "ProcessSpec",
    "PsdFactor",
    "RateFit",
    "RunConfig",
    "StatRow",
    "Trajectory",
    "beta_noise_floor",
    "block_schedule",
    "decay_profile_fit",
    "block_sums",
    "boundary_degeneracy",
    "clt_marginals",
    "coupling_scaling",
    "default_max_lag",
    "derive_seed",
    "dyadic_projection",
    "ecdf",
    "ecdf_eval",
    "empirical_process",
    "estimate_beta",
    "estimate_lambda",
    "first_block_vector",
    "fit_decay",
    "generate_trajectory",
    "generator",
    "independence_noise_floor",
    "lag_covariance",
    "lag_covariance_profile",
    "lil_envelope",
    "lsv_apply",
    "parse_config",
    "preset",
    "psd_factor",
    "rates_report",
    "render_config",
    "restrict_lambda",
    "run_suite",
    "schedule_bracketing",
    "simulate_kiefer",
    "supnorm_cost",
    "variance_growth",
    "wasserstein_empirical",
    "wasserstein_oracle",
]
