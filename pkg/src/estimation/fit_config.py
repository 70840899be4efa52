"""
Optimizer settings for a single candidate fit.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

from ..utils.exceptions import ConfigurationError
from ..utils.helpers import dataclass_from_dict
from .click_statistics import WEIGHT_SCHEMES

ESTIMATORS = ("least_squares", "binomial_ml")
PARAMETERIZATIONS = ("transformed", "raw")


@dataclass(frozen=True)
class FitConfig:
    """Settings read from the ``fit`` section of the config file."""

    gradient_tolerance: float = 1e-10
    step_tolerance: float = 1e-12
    function_tolerance: float = 1e-12
    max_iterations: int = 500
    n_starts: int = 8
    weight_scheme: str = "poisson"
    estimator: str = "least_squares"
    parameterization: str = "transformed"
    seed: int = 0
    pin_p0: bool = False
    absolute_sigma: bool = False
    boundary_tolerance: float = 1e-9
    singular_tolerance: float = 1e-12
    threads: Optional[int] = None

    def __post_init__(self):
        for name in ("gradient_tolerance", "step_tolerance", "function_tolerance"):
            value = float(getattr(self, name))
            # scipy refuses tolerances below machine epsilon
            if not value >= 2.220446049250313e-16:
                raise ConfigurationError(f"fit.{name} must be at least machine epsilon, got {value}")
            object.__setattr__(self, name, value)
        if int(self.max_iterations) < 1:
            raise ConfigurationError("fit.max_iterations must be positive")
        if int(self.n_starts) < 1:
            raise ConfigurationError("fit.n_starts must be positive")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise ConfigurationError(f"fit.weight_scheme must be one of {WEIGHT_SCHEMES}")
        if self.estimator not in ESTIMATORS:
            raise ConfigurationError(f"fit.estimator must be one of {ESTIMATORS}")
        if self.parameterization not in PARAMETERIZATIONS:
            raise ConfigurationError(f"fit.parameterization must be one of {PARAMETERIZATIONS}")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))
        object.__setattr__(self, "n_starts", int(self.n_starts))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "FitConfig":
        return dataclass_from_dict(cls, data, "fit")

    def with_overrides(self, **changes: Any) -> "FitConfig":
        """Copy with the non-None keyword values replaced."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
