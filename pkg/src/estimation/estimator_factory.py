"""
Estimator and parameterization factories for candidate fits.
Supports weighted least squares and binomial maximum likelihood, fitted in
transformed (log / logit) or raw box-constrained coordinates.
"""

import math
from typing import Tuple

import numpy as np
from scipy.special import expit, logit, xlogy

from ..utils.exceptions import ValidationError
from .click_statistics import DataArrays

ETA_FLOOR = 1e-12
LOGIT_CLAMP = 40.0


class WeightedLeastSquares:
    """Residuals ``(model - observed) / sigma``."""

    name = "least_squares"

    def residuals(self, predicted: np.ndarray, data: DataArrays) -> np.ndarray:
        return (predicted - data.rate) / data.sigma

    def jacobian(self, predicted: np.ndarray, d_predicted: np.ndarray, data: DataArrays) -> np.ndarray:
        return d_predicted / data.sigma[:, None]


class BinomialDeviance:
    """
    Signed deviance residuals of the binomial likelihood.

    Their sum of squares is twice the negative log-likelihood ratio, so a
    least-squares solver on them returns the maximum-likelihood estimate.
    """

    name = "binomial_ml"

    @staticmethod
    def _clip(predicted: np.ndarray) -> np.ndarray:
        return np.clip(predicted, 1e-300, 1.0 - 1e-16)

    def residuals(self, predicted: np.ndarray, data: DataArrays) -> np.ndarray:
        q = self._clip(predicted)
        c, t = data.clicks, data.trials
        miss = t - c
        deviance = 2.0 * (
            xlogy(c, c) - xlogy(c, t * q) + xlogy(miss, miss) - xlogy(miss, t * (1.0 - q))
        )
        return np.sign(q - data.rate) * np.sqrt(np.maximum(deviance, 0.0))

    def jacobian(self, predicted: np.ndarray, d_predicted: np.ndarray, data: DataArrays) -> np.ndarray:
        q = self._clip(predicted)
        r = self.residuals(predicted, data)
        c, t = data.clicks, data.trials
        d_dev = 2.0 * (t * q - c) / (q * (1.0 - q))
        near = np.abs(r) < 1e-8
        with np.errstate(divide="ignore", invalid="ignore"):
            d_r = np.where(near, np.sqrt(t / (q * (1.0 - q))), d_dev / (2.0 * r))
        return d_predicted * d_r[:, None]


class TransformedCoordinates:
    """``log(eta)`` and ``logit(p_i)``, the latter clamped to +/-40."""

    name = "transformed"

    def bounds(self, n_p: int) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.concatenate(([math.log(ETA_FLOOR)], np.full(n_p, -LOGIT_CLAMP)))
        upper = np.concatenate(([0.0], np.full(n_p, LOGIT_CLAMP)))
        return lower, upper

    def to_internal(self, eta: float, p: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            u_p = np.clip(logit(np.asarray(p, dtype=float)), -LOGIT_CLAMP, LOGIT_CLAMP)
        return np.concatenate(([math.log(min(max(eta, ETA_FLOOR), 1.0))], u_p))

    def to_external(self, u: np.ndarray) -> Tuple[float, np.ndarray]:
        return min(math.exp(u[0]), 1.0), expit(u[1:])

    def derivative(self, u: np.ndarray) -> np.ndarray:
        """Diagonal of d(eta, p) / du."""
        eta, p = self.to_external(u)
        return np.concatenate(([eta], p * (1.0 - p)))


class RawCoordinates:
    """``eta`` in ``[1e-12, 1]`` and ``p_i`` in ``[0, 1]`` directly."""

    name = "raw"

    def bounds(self, n_p: int) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.concatenate(([ETA_FLOOR], np.zeros(n_p)))
        upper = np.ones(n_p + 1)
        return lower, upper

    def to_internal(self, eta: float, p: np.ndarray) -> np.ndarray:
        return np.concatenate(([min(max(eta, ETA_FLOOR), 1.0)], np.clip(p, 0.0, 1.0)))

    def to_external(self, u: np.ndarray) -> Tuple[float, np.ndarray]:
        return float(np.clip(u[0], ETA_FLOOR, 1.0)), np.clip(u[1:], 0.0, 1.0)

    def derivative(self, u: np.ndarray) -> np.ndarray:
        return np.ones_like(u)


def get_estimator(estimator: str = "least_squares"):
    """
    Create the residual model for a fit.

    Args:
        estimator: ``"least_squares"`` or ``"binomial_ml"``

    Returns:
        Object with ``residuals`` and ``jacobian`` methods

    Raises:
        ValidationError: If the estimator is not supported
    """
    estimator = estimator.lower()

    if estimator == "least_squares":
        return WeightedLeastSquares()
    elif estimator == "binomial_ml":
        return BinomialDeviance()
    else:
        raise ValidationError(
            f"Unsupported estimator: {estimator}. "
            f"Supported estimators: least_squares, binomial_ml"
        )


def get_parameterization(parameterization: str = "transformed"):
    """
    Create the coordinate system the optimizer works in.

    Args:
        parameterization: ``"transformed"`` or ``"raw"``

    Returns:
        Object with ``bounds``, ``to_internal``, ``to_external`` and ``derivative``

    Raises:
        ValidationError: If the parameterization is not supported
    """
    parameterization = parameterization.lower()

    if parameterization == "transformed":
        return TransformedCoordinates()
    elif parameterization == "raw":
        return RawCoordinates()
    else:
        raise ValidationError(
            f"Unsupported parameterization: {parameterization}. "
            f"Supported parameterizations: transformed, raw"
        )
