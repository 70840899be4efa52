"""Constrained fitting of EPDC models to measured click statistics."""

from .candidate_fit import (
    CandidateFit,
    chi_square,
    fit_candidate,
    initial_guess,
    objective_gradient,
    standard_errors,
)
from .click_statistics import ClickStatistics, as_arrays, counting_sigma
from .estimator_factory import get_estimator, get_parameterization
from .fit_config import FitConfig

__all__ = [
    "CandidateFit",
    "ClickStatistics",
    "FitConfig",
    "as_arrays",
    "chi_square",
    "counting_sigma",
    "fit_candidate",
    "get_estimator",
    "get_parameterization",
    "initial_guess",
    "objective_gradient",
    "standard_errors",
]
