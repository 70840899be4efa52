"""
Domain types for the effective photon detector model.
Holds the loss-plus-nonlinearity parameter set and explicit photon-number
distributions used as detector inputs.
"""

import math
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binom

from ..utils.exceptions import DomainError, ValidationError

DISTRIBUTION_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class EpdcModel:
    """
    Linear loss ``eta`` followed by a nonlinear click stage.

    ``p[i]`` is the click probability given ``i`` photons survive the loss.
    Every index above ``i_max`` clicks with certainty.
    """

    eta: float
    p: Tuple[float, ...]

    def __post_init__(self):
        eta = float(self.eta)
        p = tuple(float(v) for v in np.atleast_1d(np.asarray(self.p, dtype=float)))
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "p", p)

        violations = []
        if not (math.isfinite(eta) and 0.0 < eta <= 1.0):
            violations.append(f"eta must lie in (0, 1], got {eta!r}")
        if not p:
            violations.append("p must contain at least p_0")
        for i, value in enumerate(p):
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                violations.append(f"p_{i} must lie in [0, 1], got {value!r}")
        if violations:
            raise ValidationError("invalid EpdcModel: " + "; ".join(violations))

    @property
    def i_max(self) -> int:
        """Truncation order; p_j is 1 for every j above it."""
        return len(self.p) - 1

    @property
    def n_parameters(self) -> int:
        return len(self.p) + 1

    def parameter_names(self) -> List[str]:
        """Names in vector order: eta, p_0 ... p_imax."""
        return ["eta"] + [f"p_{i}" for i in range(len(self.p))]

    def parameter_vector(self) -> np.ndarray:
        return np.array((self.eta,) + self.p, dtype=float)

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "EpdcModel":
        """Build a model from ``(eta, p_0, ..., p_imax)``."""
        values = [float(v) for v in vector]
        if len(values) < 2:
            raise ValidationError("parameter vector needs eta and at least p_0")
        return cls(eta=values[0], p=tuple(values[1:]))

    def padded_p(self, length: int) -> np.ndarray:
        """
        Click probabilities for photon numbers ``0 .. length-1``.

        Args:
            length: Number of entries to return

        Returns:
            Array with the implicit unit tail filled in
        """
        out = np.ones(length, dtype=float)
        n = min(length, len(self.p))
        out[:n] = self.p[:n]
        return out

    def povm_diagonal(self, cutoff: int) -> np.ndarray:
        """
        Diagonal of the click POVM element in the incident Fock basis.

        Each incident photon survives the loss independently with
        probability ``eta``; entry ``n`` is the click probability for an
        incident ``n``-photon Fock state.

        Args:
            cutoff: Largest incident photon number to include

        Returns:
            Array of length ``cutoff + 1``
        """
        if not isinstance(cutoff, Integral) or isinstance(cutoff, bool) or cutoff < 0:
            raise DomainError(f"cutoff must be a nonnegative integer, got {cutoff!r}")
        ns = np.arange(cutoff + 1)[:, None]
        # surviving counts above i_max click with certainty
        below = binom.pmf(np.arange(self.i_max + 1)[None, :], ns, self.eta) @ np.asarray(self.p)
        return np.clip(below + binom.sf(self.i_max, ns[:, 0], self.eta), 0.0, 1.0)

    def extended(self, i_max: int) -> "EpdcModel":
        """Same detector written at a higher truncation order."""
        if i_max < self.i_max:
            raise ValidationError(f"cannot shrink i_max from {self.i_max} to {i_max}")
        return EpdcModel(eta=self.eta, p=tuple(self.padded_p(i_max + 1)))

    def to_dict(self) -> Dict[str, Any]:
        return {"eta": self.eta, "p": list(self.p), "i_max": self.i_max}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EpdcModel":
        """
        Build a model from a mapping with ``eta``, ``p`` and optional ``i_max``.

        Raises:
            ValidationError: If ``i_max`` disagrees with the length of ``p``
        """
        try:
            model = cls(eta=data["eta"], p=tuple(data["p"]))
        except KeyError as e:
            raise ValidationError(f"model definition is missing {e.args[0]!r}")
        declared = data.get("i_max")
        if declared is not None and int(declared) != model.i_max:
            raise ValidationError(
                f"length(p) must equal i_max + 1: got {len(model.p)} entries for i_max={declared}"
            )
        return model


@dataclass(frozen=True, eq=False)
class PhotonNumberDistribution:
    """Diagonal photon-number weights of a phase-insensitive input state."""

    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        try:
            weights = np.array(self.weights, dtype=float).ravel()
        except (TypeError, ValueError) as e:
            raise ValidationError(f"photon-number weights must be real numbers: {e}")
        if weights.size == 0:
            raise ValidationError("photon-number distribution must have at least one weight")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise ValidationError("photon-number weights must be finite and nonnegative")
        total = math.fsum(weights)
        if abs(total - 1.0) > DISTRIBUTION_SUM_TOLERANCE:
            raise ValidationError(
                f"photon-number weights must sum to 1 within {DISTRIBUTION_SUM_TOLERANCE:g}, "
                f"got {total!r}"
            )
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def cutoff(self) -> int:
        return self.weights.size - 1

    @property
    def mean(self) -> float:
        return math.fsum(np.arange(self.weights.size) * self.weights)

    @classmethod
    def fock(cls, n: int) -> "PhotonNumberDistribution":
        """Pure ``n``-photon state."""
        if not isinstance(n, Integral) or isinstance(n, bool) or n < 0:
            raise DomainError(f"Fock photon number must be a nonnegative integer, got {n!r}")
        weights = np.zeros(n + 1)
        weights[n] = 1.0
        return cls(weights)

    @classmethod
    def coherent(cls, mean: float, tail_tolerance: float = 1e-14) -> "PhotonNumberDistribution":
        """
        Poissonian weights truncated once the cumulative weight reaches
        ``1 - tail_tolerance``.
        """
        from .poisson import poisson_tail, poisson_weights

        mean = _nonnegative(mean, "mean photon number")
        cutoff = 0
        step = max(1, int(math.sqrt(mean)))
        while poisson_tail(cutoff, mean) > tail_tolerance:
            cutoff += step
        while cutoff > 0 and poisson_tail(cutoff - 1, mean) <= tail_tolerance:
            cutoff -= 1
        return cls(_renormalized(poisson_weights(np.arange(cutoff + 1), mean)))

    @classmethod
    def thermal(cls, mean: float, tail_tolerance: float = 1e-14) -> "PhotonNumberDistribution":
        """Bose-Einstein weights truncated at ``1 - tail_tolerance``."""
        mean = _nonnegative(mean, "mean photon number")
        if mean == 0.0:
            return cls.fock(0)
        ratio = mean / (1.0 + mean)
        cutoff = max(0, math.ceil(math.log(tail_tolerance) / math.log(ratio)) - 1)
        ns = np.arange(cutoff + 1)
        weights = np.exp(ns * math.log(ratio) - math.log1p(mean))
        return cls(_renormalized(weights))


def _renormalized(weights: np.ndarray) -> np.ndarray:
    # long exp() sums drift past the constructor tolerance
    return weights / math.fsum(weights)


def _nonnegative(value: Any, name: str) -> float:
    if not isinstance(value, Real) or isinstance(value, bool):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise DomainError(f"{name} must be finite and nonnegative, got {value!r}")
    return value


def as_model(model: Optional[EpdcModel]) -> EpdcModel:
    """Guard used at operation boundaries."""
    if not isinstance(model, EpdcModel):
        raise ValidationError(f"expected an EpdcModel, got {type(model).__name__}")
    return model
