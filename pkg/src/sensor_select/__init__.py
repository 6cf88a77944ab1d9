"""Greedy sensor selection for finite-horizon linear-Gaussian smoothing,
with computable near-optimality certificates and reproduction experiments."""

from ._version import __version__
from .bounds import BoundsReport, compute_bounds, guarantee_coefficient, isotropic_bounds
from .errors import (
    BudgetError,
    ConsistencyError,
    ModelFormatError,
    NumericalError,
    SensorSelectError,
)
from .experiments import (
    ExperimentConfig,
    SweepRecord,
    random_stable_system,
    read_sweep_csv,
    run_sweep,
    write_sweep_csv,
)
from .greedy import GreedyStep, SelectionResult, greedy_select
from .model import (
    SensorSet,
    StackedModel,
    SystemModel,
    build_phi,
    build_stacked,
    load_model,
    save_model,
    sensor_info_matrix,
)
from .objective import ScoreValue, info_sum, marginal_gain, mse
from .oracle import (
    ExactRatios,
    SmoothingSample,
    brute_force_optimum,
    error_covariance,
    exact_ratios,
    monte_carlo_mse,
    simulate_sample,
    smoother_estimate,
    state_trajectory,
)

__all__ = [
    "__version__",
    "BoundsReport", "compute_bounds", "guarantee_coefficient", "isotropic_bounds",
    "BudgetError", "ConsistencyError", "ModelFormatError", "NumericalError",
    "SensorSelectError",
    "ExperimentConfig", "SweepRecord", "random_stable_system",
    "read_sweep_csv", "run_sweep", "write_sweep_csv",
    "GreedyStep", "SelectionResult", "greedy_select",
    "SensorSet", "StackedModel", "SystemModel", "build_phi", "build_stacked",
    "load_model", "save_model", "sensor_info_matrix",
    "ScoreValue", "info_sum", "marginal_gain", "mse",
    "ExactRatios", "SmoothingSample", "brute_force_optimum", "error_covariance",
    "exact_ratios", "monte_carlo_mse", "simulate_sample", "smoother_estimate",
    "state_trajectory",
]
