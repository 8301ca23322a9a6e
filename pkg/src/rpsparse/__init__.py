"""Robust sparse linear regression with Renyi-pseudodistance loss and nonconcave penalties."""
from .data import Dataset, FitResult, back_transform, standardize
from .influence import IfSetting, boundedness_report, if_curve, j_alpha
from .path import PathResult, fit_path, hbic, lambda_grid
from .penalties import Family, PenaltySpec, univariate_min
from .simulation import Method, ScenarioSpec, Signal, XOutliers, YOutliers, run_scenario
from .solver import SolverConfig, fit

__all__ = [
    "Dataset",
    "FitResult",
    "Family",
    "IfSetting",
    "Method",
    "PathResult",
    "PenaltySpec",
    "ScenarioSpec",
    "Signal",
    "SolverConfig",
    "XOutliers",
    "YOutliers",
    "back_transform",
    "boundedness_report",
    "fit",
    "fit_path",
    "hbic",
    "if_curve",
    "j_alpha",
    "lambda_grid",
    "run_scenario",
    "standardize",
    "univariate_min",
]

__version__ = "0.1.0"
