"""Robust parameter estimation for discrete models by minimum divergence.

The package evaluates a two-parameter family of statistical divergences
between observed frequency data and a parametric pmf, together with a
penalized variant that keeps every family member finite in the presence of
empty cells. On top of that sit the minimum-divergence estimators, their
model-based sandwich variances, a Monte-Carlo engine for studying the
penalty factor at small sample sizes, and a brute-force oracle that
cross-checks everything by exhaustive search.
"""

__version__ = "0.1.0"

from .divergence import (
    LIMIT_THRESHOLD,
    DivergenceParams,
    Regime,
    derive_exponents,
    penalized_residual_kernel,
    penalized_s_divergence,
    residual_kernel,
    s_divergence,
)
from .datasets import fixture_names, get_fixture, load_dataset, resolve_dataset
from .estimation import (
    AsymptoticVariance,
    EstimationResult,
    asymptotic_variance,
    estimating_function,
    fit,
    fit_penalty_family,
)
from .exceptions import (
    AllReplicatesFailedError,
    DatasetParseError,
    DuplicateSupportPointError,
    EmptyCellUndefinedError,
    MissingCellsError,
    NonPositiveCountError,
    SdivestError,
    SingularInformationError,
)
from .frequency import FrequencyTable
from .models import DiscreteModel, PoissonModel, replicate_rng, replicate_seed
from .oracle import OracleConfig, grid_minimize, long_sum_check, run_verification
from .simulation import (
    DEFAULT_BETA_GRID,
    DEFAULT_H_GRID,
    CellResult,
    ExperimentGrid,
    MseSurface,
    optimal_h,
    relative_increase,
    run_mse_cell,
    sweep_beta,
    sweep_h,
)

__all__ = [
    "AllReplicatesFailedError",
    "AsymptoticVariance",
    "CellResult",
    "DatasetParseError",
    "DEFAULT_BETA_GRID",
    "DEFAULT_H_GRID",
    "DiscreteModel",
    "DivergenceParams",
    "DuplicateSupportPointError",
    "EmptyCellUndefinedError",
    "EstimationResult",
    "ExperimentGrid",
    "FrequencyTable",
    "LIMIT_THRESHOLD",
    "MissingCellsError",
    "MseSurface",
    "NonPositiveCountError",
    "OracleConfig",
    "PoissonModel",
    "Regime",
    "SdivestError",
    "SingularInformationError",
    "asymptotic_variance",
    "derive_exponents",
    "estimating_function",
    "fit",
    "fit_penalty_family",
    "fixture_names",
    "get_fixture",
    "grid_minimize",
    "load_dataset",
    "long_sum_check",
    "optimal_h",
    "penalized_residual_kernel",
    "penalized_s_divergence",
    "relative_increase",
    "replicate_rng",
    "replicate_seed",
    "resolve_dataset",
    "run_mse_cell",
    "run_verification",
    "s_divergence",
    "sweep_beta",
    "sweep_h",
]
