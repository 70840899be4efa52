"""
Fitting an EPDC model of fixed truncation order to click statistics.

Bounded trust-region least squares from several deterministic starts; the
best start is kept and reported with its reduced chi-square and the
Jacobian-based parameter covariance.
"""

import logging
import math
from dataclasses import dataclass, replace
from numbers import Integral
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from ..photon_statistics import EpdcModel, click_probability, click_probability_jacobian
from ..utils.exceptions import (
    ConvergenceError,
    DomainError,
    IdentifiabilityError,
    SingularCovarianceError,
)
from .click_statistics import ClickStatistics, DataArrays, as_arrays, check_dataset
from .estimator_factory import ETA_FLOOR, get_estimator, get_parameterization
from .fit_config import FitConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CandidateFit:
    """One fitted model of the candidate ladder plus its fit diagnostics."""

    model: EpdcModel
    chi2: float
    chi2_reduced: float
    n_points: int
    covariance: np.ndarray
    free_parameters: Tuple[str, ...]
    converged: bool = True
    iterations: int = 0
    termination: str = ""
    objective: float = math.nan
    optimality: float = math.nan
    at_bound: Tuple[str, ...] = ()
    singular_parameters: Tuple[str, ...] = ()
    estimator: str = "least_squares"

    @property
    def i_max(self) -> int:
        return self.model.i_max

    @property
    def n_free(self) -> int:
        return len(self.free_parameters)

    @property
    def dof(self) -> int:
        return self.n_points - self.n_free

    def standard_error_map(self) -> Dict[str, float]:
        """Standard error per free parameter, NaN where unidentifiable."""
        try:
            errors = standard_errors(self)
        except (SingularCovarianceError, ConvergenceError):
            diag = np.diag(self.covariance)
            errors = np.where(np.isfinite(diag) & (diag >= 0.0), np.sqrt(np.abs(diag)), math.nan)
            errors = [
                math.nan if name in self.singular_parameters else float(err)
                for name, err in zip(self.free_parameters, errors)
            ]
        return {name: float(err) for name, err in zip(self.free_parameters, errors)}


def chi_square(data: Sequence[ClickStatistics], model: EpdcModel) -> float:
    """Weighted residual sum of squares of ``model`` against ``data``."""
    arrays = as_arrays(data)
    return _pearson(arrays, model)


def _pearson(arrays: DataArrays, model: EpdcModel) -> float:
    residuals = (arrays.rate - click_probability(model, arrays.mean_photons)) / arrays.sigma
    return math.fsum(residuals ** 2)


def objective_gradient(data: Sequence[ClickStatistics], model: EpdcModel) -> np.ndarray:
    """
    Gradient of the chi-square with respect to ``(eta, p_0 ... p_imax)``.

    Args:
        data: Click statistics
        model: Point at which to evaluate

    Returns:
        Gradient vector in parameter order
    """
    arrays = as_arrays(data)
    predicted = click_probability(model, arrays.mean_photons)
    residuals = (predicted - arrays.rate) / arrays.sigma
    jac = click_probability_jacobian(model, arrays.mean_photons) / arrays.sigma[:, None]
    return 2.0 * jac.T @ residuals


def initial_guess(arrays: DataArrays, i_max: int) -> EpdcModel:
    """
    Cheap deterministic start.

    ``p_i = min(1, i / (i_max + 1))``; ``eta`` from the low-N slope of R/N
    divided by the one-photon click probability of that start.
    """
    p = [min(1.0, i / (i_max + 1)) for i in range(i_max + 1)]
    p_one = 1.0 if i_max == 0 else p[1]
    order = np.argsort(arrays.mean_photons, kind="stable")
    usable = [k for k in order if arrays.mean_photons[k] > 0.0 and arrays.rate[k] > 0.0][:3]
    if usable:
        slope = float(np.median(arrays.rate[usable] / arrays.mean_photons[usable]))
        eta = slope / p_one
    else:
        eta = 1.0 / float(np.median(arrays.mean_photons[arrays.mean_photons > 0.0]))
    return EpdcModel(eta=min(max(eta, ETA_FLOOR), 1.0), p=tuple(p))


def quasi_random_starts(arrays: DataArrays, i_max: int, count: int, seed: int) -> List[EpdcModel]:
    """
    Scrambled Halton starts over the parameter box.

    ``eta`` is drawn log-uniformly between ``1/N_max`` and ``1/N_min`` (the
    range where ``eta * N`` passes through order one somewhere in the data),
    each ``p_i`` uniformly in ``(0, 1)``.
    """
    if count <= 0:
        return []
    positive = arrays.mean_photons[arrays.mean_photons > 0.0]
    low = max(ETA_FLOOR, 1.0 / positive.max())
    high = min(1.0, 1.0 / positive.min())
    if low >= high:
        low, high = ETA_FLOOR, 1.0
    sampler = qmc.Halton(d=i_max + 2, scramble=True, seed=seed)
    draws = sampler.random(count)
    etas = np.exp(math.log(low) + draws[:, 0] * (math.log(high) - math.log(low)))
    return [
        EpdcModel(eta=min(float(eta), 1.0), p=tuple(np.clip(row, 0.0, 1.0)))
        for eta, row in zip(etas, draws[:, 1:])
    ]


def _covariance(jac: np.ndarray, names: Sequence[str], tolerance: float):
    """Pseudo-inverse of J^T J with column scaling; flags near-null directions."""
    scale = np.linalg.norm(jac, axis=0)
    zero = scale == 0.0
    safe = np.where(zero, 1.0, scale)
    normalized = jac / safe
    info = normalized.T @ normalized
    w, v = np.linalg.eigh(info)
    small = w <= tolerance * max(float(w.max()), 0.0)
    singular = {names[i] for i in np.flatnonzero(zero)}
    if np.any(small):
        weight = np.abs(v[:, small]).max(axis=1)
        singular |= {names[i] for i in np.flatnonzero(weight > 0.1)}
    with np.errstate(divide="ignore"):
        inverse_w = np.where(small, 0.0, 1.0 / w)
    cov = (v * inverse_w) @ v.T / np.outer(safe, safe)
    cov = 0.5 * (cov + cov.T)
    return cov, tuple(name for name in names if name in singular)


def fit_candidate(
    data: Sequence[ClickStatistics],
    i_max: int,
    config: Optional[FitConfig] = None,
    extra_starts: Iterable[EpdcModel] = (),
) -> CandidateFit:
    """
    Fit an EPDC model truncated at ``i_max``.

    Args:
        data: Click statistics, at least ``i_max + 3`` points spanning two
            decades of mean photon number
        i_max: Truncation order
        config: Optimizer settings (defaults used if None)
        extra_starts: Additional starting models, e.g. the optimum of a
            smaller candidate; lower orders are extended with a unit tail

    Returns:
        CandidateFit for the best converged start

    Raises:
        ArityError: If there are too few data points
        IdentifiabilityError: If all observed rates are identical
        ConvergenceError: If no start converged; carries the best state
    """
    if config is None:
        config = FitConfig()
    if not isinstance(i_max, Integral) or isinstance(i_max, bool) or i_max < 0:
        raise DomainError(f"i_max must be a nonnegative integer, got {i_max!r}")
    i_max = int(i_max)

    n_p = i_max + 1
    free_p = np.arange(1, n_p) if config.pin_p0 else np.arange(n_p)
    free_columns = np.concatenate(([0], free_p + 1))
    names = ("eta",) + tuple(f"p_{i}" for i in free_p)

    arrays = check_dataset(data, len(names))
    if np.ptp(arrays.rate) == 0.0:
        raise IdentifiabilityError(
            "all observed click rates are identical; the data cannot separate eta from p_i"
        )

    estimator = get_estimator(config.estimator)
    coords = get_parameterization(config.parameterization)
    lower, upper = coords.bounds(free_p.size)
    n_photons = arrays.mean_photons

    def assemble(u: np.ndarray) -> EpdcModel:
        eta, p_free = coords.to_external(u)
        p = np.zeros(n_p)
        p[free_p] = p_free
        return EpdcModel(eta=max(eta, ETA_FLOOR), p=tuple(p))

    def residuals(u: np.ndarray) -> np.ndarray:
        return estimator.residuals(click_probability(assemble(u), n_photons), arrays)

    def jacobian(u: np.ndarray) -> np.ndarray:
        model = assemble(u)
        predicted = click_probability(model, n_photons)
        d_theta = click_probability_jacobian(model, n_photons)[:, free_columns]
        return estimator.jacobian(predicted, d_theta * coords.derivative(u)[None, :], arrays)

    starts = [initial_guess(arrays, i_max)]
    starts += [m.extended(i_max) for m in extra_starts if m.i_max <= i_max]
    starts += quasi_random_starts(arrays, i_max, config.n_starts - 1, config.seed)

    best = None
    best_key = None
    total_nfev = 0
    for index, start in enumerate(starts):
        u0 = np.clip(coords.to_internal(start.eta, np.asarray(start.p)[free_p]), lower, upper)
        try:
            result = least_squares(
                residuals,
                u0,
                jac=jacobian,
                bounds=(lower, upper),
                method="trf",
                ftol=config.function_tolerance,
                xtol=config.step_tolerance,
                gtol=config.gradient_tolerance,
                x_scale="jac",
                max_nfev=config.max_iterations,
            )
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.debug("i_max=%d start %d failed: %s", i_max, index, e)
            continue
        total_nfev += result.nfev
        logger.debug(
            "i_max=%d start %d: cost=%.6g status=%d nfev=%d",
            i_max, index, result.cost, result.status, result.nfev,
        )
        key = (result.status <= 0, result.cost)
        if best_key is None or key < best_key:
            best, best_key = result, key

    if best is None:
        raise ConvergenceError(f"every optimizer start failed for i_max={i_max}")

    fit = _build_fit(assemble(best.x), arrays, names, free_p, config, estimator.name)
    fit = replace(
        fit,
        converged=best.status > 0,
        iterations=total_nfev,
        termination=str(best.message),
        objective=float(2.0 * best.cost),
        optimality=float(best.optimality),
    )
    if not fit.converged:
        raise ConvergenceError(
            f"no start converged for i_max={i_max} within {config.max_iterations} "
            f"evaluations: {best.message}",
            best_fit=fit,
        )
    logger.info("i_max=%d: chi2_red=%.6g (%s)", i_max, fit.chi2_reduced, fit.termination)
    return fit


def _build_fit(
    model: EpdcModel,
    arrays: DataArrays,
    names: Tuple[str, ...],
    free_p: np.ndarray,
    config: FitConfig,
    estimator_name: str,
) -> CandidateFit:
    tol = config.boundary_tolerance
    at_bound = []
    eta = model.eta
    if eta >= 1.0 - tol:
        eta = 1.0
        at_bound.append("eta")
    elif eta <= ETA_FLOOR * (1.0 + tol):
        at_bound.append("eta")
    p = list(model.p)
    for i in free_p:
        if p[i] <= tol:
            p[i] = 0.0
            at_bound.append(f"p_{i}")
        elif p[i] >= 1.0 - tol:
            p[i] = 1.0
            at_bound.append(f"p_{i}")
    model = EpdcModel(eta=eta, p=tuple(p))

    chi2 = _pearson(arrays, model)
    n_points = arrays.rate.size
    chi2_reduced = chi2 / (n_points - len(names))

    free_columns = np.concatenate(([0], free_p + 1))
    jac = click_probability_jacobian(model, arrays.mean_photons)[:, free_columns]
    cov, singular = _covariance(jac / arrays.sigma[:, None], names, config.singular_tolerance)
    if not config.absolute_sigma:
        cov = cov * chi2_reduced

    return CandidateFit(
        model=model,
        chi2=chi2,
        chi2_reduced=chi2_reduced,
        n_points=n_points,
        covariance=cov,
        free_parameters=names,
        at_bound=tuple(at_bound),
        singular_parameters=singular,
        estimator=estimator_name,
    )


def standard_errors(fit: CandidateFit) -> np.ndarray:
    """
    Square roots of the covariance diagonal.

    Args:
        fit: Converged candidate fit

    Returns:
        Standard errors ordered like ``fit.free_parameters``
        (``eta, p_0 ... p_imax``, without ``p_0`` when it is pinned)

    Raises:
        ConvergenceError: If the fit did not converge
        SingularCovarianceError: If some parameters are unidentifiable;
            the error lists them
    """
    if not fit.converged:
        raise ConvergenceError("standard errors require a converged fit", best_fit=fit)
    if fit.singular_parameters:
        raise SingularCovarianceError(
            "covariance is singular; unidentifiable parameters: "
            + ", ".join(fit.singular_parameters),
            fit.singular_parameters,
        )
    diag = np.diag(np.asarray(fit.covariance, dtype=float))
    bad = [name for name, d in zip(fit.free_parameters, diag) if not (math.isfinite(d) and d >= 0.0)]
    if bad:
        raise SingularCovarianceError(
            "covariance diagonal is not a valid variance for: " + ", ".join(bad), bad
        )
    return np.sqrt(diag)
