"""
Observed click statistics for one probe setting and their error model.
"""

import math
from dataclasses import dataclass
from numbers import Integral
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from ..utils.exceptions import ArityError, ValidationError

WEIGHT_SCHEMES = ("poisson", "binomial")


def counting_sigma(clicks: int, trials: int, scheme: str = "poisson") -> float:
    """
    Standard error of an observed click rate.

    Args:
        clicks: Detected pulses
        trials: Delivered pulses
        scheme: ``"poisson"`` for ``sqrt(max(clicks, 1)) / trials`` or
            ``"binomial"`` for ``sqrt(R(1 - R)/trials + 1/trials**2)``

    Returns:
        Positive standard error

    Raises:
        ValidationError: If the scheme is unknown
    """
    scheme = scheme.lower()
    if scheme == "poisson":
        return math.sqrt(max(clicks, 1)) / trials
    elif scheme == "binomial":
        rate = clicks / trials
        return math.sqrt(rate * (1.0 - rate) / trials + 1.0 / trials ** 2)
    else:
        raise ValidationError(
            f"Unsupported weight scheme: {scheme}. "
            f"Supported schemes: {', '.join(WEIGHT_SCHEMES)}"
        )


@dataclass(frozen=True)
class ClickStatistics:
    """Clicks out of trials for a coherent probe of mean ``mean_photons``."""

    mean_photons: float
    clicks: int
    trials: int
    sigma: float

    def __post_init__(self):
        mean_photons = float(self.mean_photons)
        if not math.isfinite(mean_photons) or mean_photons < 0.0:
            raise ValidationError(f"mean_photons must be finite and nonnegative, got {mean_photons!r}")
        for name in ("clicks", "trials"):
            value = getattr(self, name)
            if isinstance(value, bool) or not (
                isinstance(value, Integral) or (isinstance(value, float) and value.is_integer())
            ):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.trials <= 0:
            raise ValidationError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.clicks <= self.trials:
            raise ValidationError(
                f"clicks must lie in [0, trials], got {self.clicks} of {self.trials}"
            )
        sigma = float(self.sigma)
        if not (math.isfinite(sigma) and sigma > 0.0):
            raise ValidationError(f"sigma must be positive, got {sigma!r}")
        object.__setattr__(self, "mean_photons", mean_photons)
        object.__setattr__(self, "sigma", sigma)

    @property
    def rate(self) -> float:
        """Click probability per pulse."""
        return self.clicks / self.trials

    @classmethod
    def from_counts(
        cls,
        mean_photons: float,
        clicks: int,
        trials: int,
        weight_scheme: str = "poisson",
    ) -> "ClickStatistics":
        """Build statistics with ``sigma`` from the named weight scheme."""
        if trials <= 0:
            raise ValidationError(f"trials must be positive, got {trials}")
        return cls(
            mean_photons=mean_photons,
            clicks=clicks,
            trials=trials,
            sigma=counting_sigma(int(clicks), int(trials), weight_scheme),
        )


class DataArrays(NamedTuple):
    mean_photons: np.ndarray
    rate: np.ndarray
    sigma: np.ndarray
    clicks: np.ndarray
    trials: np.ndarray


def as_arrays(data: Iterable[ClickStatistics]) -> DataArrays:
    """Column view of a dataset, in input order."""
    points = list(data)
    return DataArrays(
        mean_photons=np.array([d.mean_photons for d in points], dtype=float),
        rate=np.array([d.rate for d in points], dtype=float),
        sigma=np.array([d.sigma for d in points], dtype=float),
        clicks=np.array([d.clicks for d in points], dtype=float),
        trials=np.array([d.trials for d in points], dtype=float),
    )


def check_dataset(data: Sequence[ClickStatistics], n_free: Optional[int] = None) -> DataArrays:
    """
    Validate a dataset before fitting.

    Args:
        data: Click statistics
        n_free: Number of free parameters to be fitted, if known

    Returns:
        Column view of the dataset

    Raises:
        ArityError: If there are fewer than ``n_free + 1`` points
        ValidationError: If the probe range spans less than two decades
    """
    points = list(data)
    if not points or not all(isinstance(d, ClickStatistics) for d in points):
        raise ArityError("dataset must be a non-empty list of ClickStatistics")
    if n_free is not None and len(points) < n_free + 1:
        raise ArityError(
            f"{len(points)} data points cannot constrain {n_free} free parameters; "
            f"need at least {n_free + 1}"
        )
    arrays = as_arrays(points)
    positive = arrays.mean_photons[arrays.mean_photons > 0.0]
    if positive.size < 2 or positive.max() < 100.0 * positive.min():
        raise ValidationError("probe mean photon numbers must span at least two decades")
    return arrays
