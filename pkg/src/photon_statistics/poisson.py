"""
Poisson photon statistics and the click probability of an EPDC detector.

All probabilities are assembled from nonnegative terms only: Poisson
weights in log space plus the upper Poisson tail from the regularized
incomplete gamma function. Nothing is computed as one minus a sum of
near-unit numbers, so rates down to the 1e-6 measurement floor keep full
relative precision.
"""

import math
from numbers import Integral, Real
from typing import Any, Union

import numpy as np
from scipy.special import gammainc, gammaln, xlogy

from ..utils.exceptions import DomainError, ValidationError
from .epdc_model import EpdcModel, PhotonNumberDistribution, as_model

ArrayLike = Union[float, np.ndarray]


def _check_photon_index(i: Any) -> int:
    if not isinstance(i, Integral) or isinstance(i, bool) or i < 0:
        raise DomainError(f"photon number must be a nonnegative integer, got {i!r}")
    return int(i)


def _check_mean(mu: Any, name: str = "mu") -> np.ndarray:
    if isinstance(mu, bool):
        raise DomainError(f"{name} must be real, got {mu!r}")
    if isinstance(mu, Real):
        values = np.asarray(float(mu))
    else:
        try:
            values = np.asarray(mu, dtype=float)
        except (TypeError, ValueError):
            raise DomainError(f"{name} must be real, got {mu!r}")
    if not np.all(np.isfinite(values)) or np.any(values < 0.0):
        raise DomainError(f"{name} must be finite and nonnegative")
    return values


def poisson_weight(i: int, mu: float) -> float:
    """
    Probability of exactly ``i`` photons in a coherent state of mean ``mu``.

    Args:
        i: Photon number
        mu: Poisson mean

    Returns:
        ``exp(-mu) mu**i / i!`` evaluated in log space

    Raises:
        DomainError: If ``mu`` is negative or ``i`` is not a nonnegative integer
    """
    i = _check_photon_index(i)
    mu = float(_check_mean(mu))
    if mu == 0.0:
        return 1.0 if i == 0 else 0.0
    return math.exp(-mu + i * math.log(mu) - math.lgamma(i + 1))


def poisson_weights(photon_numbers: np.ndarray, mu: ArrayLike) -> np.ndarray:
    """
    Vectorized Poisson weights.

    Args:
        photon_numbers: 1-D integer array of photon numbers
        mu: Scalar or 1-D array of means

    Returns:
        Array of shape ``mu.shape + photon_numbers.shape``
    """
    ks = np.asarray(photon_numbers, dtype=float)
    mus = _check_mean(mu)
    grid_mu = mus[..., None]
    with np.errstate(divide="ignore"):
        log_c = xlogy(ks, grid_mu) - grid_mu - gammaln(ks + 1.0)
    return np.exp(log_c)


def poisson_tail(k: int, mu: ArrayLike) -> ArrayLike:
    """
    Upper Poisson tail ``P[Poisson(mu) > k]``.

    Equal to the regularized lower incomplete gamma ``P(k + 1, mu)``.
    """
    k = _check_photon_index(k)
    mus = _check_mean(mu)
    tail = gammainc(k + 1.0, mus)
    return float(tail) if tail.ndim == 0 else tail


def _coherent_terms(model: EpdcModel, mu: np.ndarray):
    ks = np.arange(model.i_max + 1)
    c = poisson_weights(ks, mu)
    tail = gammainc(model.i_max + 1.0, mu)
    return c, tail


def click_probability(model: EpdcModel, mean_photons: ArrayLike) -> ArrayLike:
    """
    Click probability for a coherent probe of incident mean ``mean_photons``.

    Evaluates ``sum_i p_i c_i(mu) + P[Poisson(mu) > i_max]`` with
    ``mu = eta * mean_photons``.

    Args:
        model: Detector model
        mean_photons: Incident mean photon number(s) N

    Returns:
        Click probability, a float for scalar input or an array otherwise

    Raises:
        ValidationError: If ``model`` is not a valid EpdcModel
        DomainError: If ``mean_photons`` is negative or not finite
    """
    model = as_model(model)
    n = _check_mean(mean_photons, "mean_photons")
    mu = model.eta * n
    c, tail = _coherent_terms(model, mu)
    rate = np.minimum(np.sum(c * np.asarray(model.p), axis=-1) + tail, 1.0)
    return float(rate) if rate.ndim == 0 else rate


def no_click_probability(model: EpdcModel, mean_photons: ArrayLike) -> ArrayLike:
    """
    Complement of :func:`click_probability`, as ``sum_i (1 - p_i) c_i(mu)``.

    Accurate when the detector is close to saturation.
    """
    model = as_model(model)
    n = _check_mean(mean_photons, "mean_photons")
    c, _ = _coherent_terms(model, model.eta * n)
    miss = np.sum(c * (1.0 - np.asarray(model.p)), axis=-1)
    return float(miss) if miss.ndim == 0 else miss


def click_probability_jacobian(model: EpdcModel, mean_photons: ArrayLike) -> np.ndarray:
    """
    Partial derivatives of the click probability.

    Args:
        model: Detector model
        mean_photons: Incident mean photon number(s)

    Returns:
        Array of shape ``(len(N), i_max + 2)`` ordered ``(eta, p_0 ... p_imax)``
    """
    model = as_model(model)
    n = np.atleast_1d(_check_mean(mean_photons, "mean_photons"))
    c, _ = _coherent_terms(model, model.eta * n)
    # d/dmu of sum p_i c_i + tail is sum (p_{i+1} - p_i) c_i with p_{imax+1} = 1
    step = model.padded_p(model.i_max + 2)
    d_mu = np.sum(c * np.diff(step), axis=-1)
    jac = np.empty((n.size, model.n_parameters))
    jac[:, 0] = n * d_mu
    jac[:, 1:] = c
    return jac


def predict_response(model: EpdcModel, dist: PhotonNumberDistribution) -> float:
    """
    Click probability for an arbitrary diagonal input state.

    Each incident Fock component is binomially thinned with retention
    probability ``eta`` before the click stage acts.

    Args:
        model: Detector model
        dist: Incident photon-number distribution

    Returns:
        Click probability

    Raises:
        ValidationError: If either argument is not of the expected type
    """
    model = as_model(model)
    if not isinstance(dist, PhotonNumberDistribution):
        raise ValidationError(
            f"expected a PhotonNumberDistribution, got {type(dist).__name__}"
        )
    response = np.sum(dist.weights * model.povm_diagonal(dist.cutoff))
    return float(min(max(response, 0.0), 1.0))
