"""Photon statistics and the effective photon detector model."""

from .epdc_model import EpdcModel, PhotonNumberDistribution
from .poisson import (
    click_probability,
    click_probability_jacobian,
    no_click_probability,
    poisson_tail,
    poisson_weight,
    poisson_weights,
    predict_response,
)

__all__ = [
    "EpdcModel",
    "PhotonNumberDistribution",
    "click_probability",
    "click_probability_jacobian",
    "no_click_probability",
    "poisson_tail",
    "poisson_weight",
    "poisson_weights",
    "predict_response",
]
