"""Hyperplane alpha-quantiles of cadlag paths and their hitting times."""

__version__ = "0.1.0"

from .brownian import (
    BrownianSpec,
    QuantileLaw,
    effective_sigma,
    expected_tau_positive,
    joint_density_positive,
    mean_quantile,
    quantile_law,
)
from .errors import ValidationError
from .hitting import HitCase, HittingTime, hitting_time, hitting_time_continuous, tau_one_sided_limits
from .paths import CadlagPath, Interpolation, jump_times, load_path, project, running_inf, running_sup, save_path
from .quantile import (
    DiscontinuitySet,
    OccupationCdf,
    QuantileCurve,
    QuantileResult,
    discontinuity_set,
    occupation_cdf,
    quantile,
    quantile_curve,
)
from .skorokhod import J1Distance, SearchParams, TimeChange, j1_distance, truncate, uniform_distance

__all__ = [
    "BrownianSpec", "CadlagPath", "DiscontinuitySet", "HitCase", "HittingTime", "Interpolation",
    "J1Distance", "OccupationCdf", "QuantileCurve", "QuantileLaw", "QuantileResult", "SearchParams",
    "TimeChange", "ValidationError", "discontinuity_set", "effective_sigma", "expected_tau_positive",
    "hitting_time", "hitting_time_continuous", "j1_distance", "joint_density_positive", "jump_times",
    "load_path", "mean_quantile", "occupation_cdf", "project", "quantile", "quantile_curve",
    "quantile_law", "running_inf", "running_sup", "save_path", "tau_one_sided_limits", "truncate",
    "uniform_distance",
]
