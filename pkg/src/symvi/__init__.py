"""Mean recovery under symmetry for location-family variational inference."""

from .cases import CASES, get_case
from .conditions import Convexity, GuaranteeVerdict, VerdictKind, check_convexity, verdict
from .densities import (
    BaseDensity,
    LocationFamily,
    ScaleMatrix,
    SupportSpec,
    TargetDensity,
    cauchy_family,
    gaussian_family,
    gaussian_target,
    laplace_family,
    make_bimodal_2d,
    make_target_p1,
    make_target_p2,
    student_t_family,
    uniform_target,
)
from .divergences import DivergenceSpec, divergence_full, objective_simplified, weight_function
from .geometry import HalfspacePartition, classify_point, delta_objective_decomposition, delta_w
from .landscape import SweepConfig, classify_at_mean, stationarity_residual, sweep
from .optimizer import OptimizerConfig, optimize_location

__all__ = [
    "BaseDensity",
    "CASES",
    "Convexity",
    "DivergenceSpec",
    "GuaranteeVerdict",
    "HalfspacePartition",
    "LocationFamily",
    "OptimizerConfig",
    "ScaleMatrix",
    "SupportSpec",
    "SweepConfig",
    "TargetDensity",
    "VerdictKind",
    "cauchy_family",
    "check_convexity",
    "classify_at_mean",
    "classify_point",
    "delta_objective_decomposition",
    "delta_w",
    "divergence_full",
    "gaussian_family",
    "gaussian_target",
    "get_case",
    "laplace_family",
    "make_bimodal_2d",
    "make_target_p1",
    "make_target_p2",
    "objective_simplified",
    "optimize_location",
    "stationarity_residual",
    "student_t_family",
    "sweep",
    "uniform_target",
    "verdict",
    "weight_function",
]
