"""Random coefficient autoregressions whose coefficients carry MA(1) noise.

Simulation, the exact almost-sure limit of OLS (which differs from the mean
coefficients as soon as the coefficient noise is serially correlated), and
Monte Carlo tools for the resulting spurious significance.
"""

__version__ = "0.1.0"

from .estimator import EstimationResult, LagFeatures, RCAROLS, estimate, ols, variance_estimates, z_statistics
from .exceptions import (
    ConfigError,
    DegenerateDataError,
    ExplosionError,
    NonStationaryError,
    RCARError,
    ThetaStarError,
)
from .model import (
    Admissibility,
    ModelParams,
    NoiseSpec,
    check_admissibility,
    check_log_condition,
    classify_theta_star,
    fig1_params,
)
from .moments import (
    build_gamma_set,
    build_lag_recursion,
    check_yule_walker,
    closed_form_p2,
    solve_moments,
)
from .montecarlo import MCConfig, MCReport, ks_statistic, run_distribution, run_lil, run_rejection_grid
from .simulate import Trajectory, simulate, stream_increasing

__all__ = [
    "Admissibility",
    "ConfigError",
    "DegenerateDataError",
    "EstimationResult",
    "ExplosionError",
    "LagFeatures",
    "MCConfig",
    "MCReport",
    "ModelParams",
    "NoiseSpec",
    "NonStationaryError",
    "RCARError",
    "RCAROLS",
    "ThetaStarError",
    "Trajectory",
    "build_gamma_set",
    "build_lag_recursion",
    "check_admissibility",
    "check_log_condition",
    "check_yule_walker",
    "classify_theta_star",
    "closed_form_p2",
    "estimate",
    "fig1_params",
    "ks_statistic",
    "ols",
    "run_distribution",
    "run_lil",
    "run_rejection_grid",
    "simulate",
    "solve_moments",
    "stream_increasing",
    "variance_estimates",
    "z_statistics",
]
