"""
Optical power to mean photon number per pulse, and back.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np
from scipy.constants import c, h

from ..utils.exceptions import ConfigurationError, DomainError
from ..utils.helpers import dataclass_from_dict

ArrayLike = Union[float, np.ndarray]

PLANCK_TIMES_LIGHT_SPEED = h * c


@dataclass(frozen=True)
class OpticalConfig:
    """Source wavelength (m), pulse repetition rate (Hz) and fixed attenuation (dB)."""

    wavelength: float = 1.5e-6
    repetition_rate: float = 2.0e7
    attenuation_db: float = 0.0

    def __post_init__(self):
        for name in ("wavelength", "repetition_rate", "attenuation_db"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (math.isfinite(self.wavelength) and self.wavelength > 0.0):
            raise ConfigurationError(f"optics.wavelength must be positive, got {self.wavelength!r}")
        if not (math.isfinite(self.repetition_rate) and self.repetition_rate > 0.0):
            raise ConfigurationError(f"optics.repetition_rate must be positive, got {self.repetition_rate!r}")
        if not (math.isfinite(self.attenuation_db) and self.attenuation_db >= 0.0):
            raise ConfigurationError(f"optics.attenuation_db must be nonnegative, got {self.attenuation_db!r}")

    @property
    def photons_per_watt(self) -> float:
        """Mean photons per pulse delivered to the detector per watt of measured power."""
        transmission = 10.0 ** (-self.attenuation_db / 10.0)
        return self.wavelength / (PLANCK_TIMES_LIGHT_SPEED * self.repetition_rate) * transmission

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "OpticalConfig":
        return dataclass_from_dict(cls, data, "optics")


def _nonnegative(values: ArrayLike, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(array)) or np.any(array < 0.0):
        raise DomainError(f"{name} must be finite and nonnegative, got {values!r}")
    return array


def power_to_mean_photons(power: ArrayLike, config: Optional[OpticalConfig] = None) -> ArrayLike:
    """
    Mean photon number per pulse for a measured average power.

    ``N = P lambda / (h c f_rep) * 10 ** (-attenuation_db / 10)``

    Args:
        power: Average optical power in watts
        config: Wavelength, repetition rate and attenuation

    Returns:
        N, scalar for scalar input
    """
    config = config or OpticalConfig()
    n = _nonnegative(power, "power") * config.photons_per_watt
    return float(n) if n.ndim == 0 else n


def mean_photons_to_power(mean_photons: ArrayLike, config: Optional[OpticalConfig] = None) -> ArrayLike:
    """Inverse of :func:`power_to_mean_photons`; watts for a given N."""
    config = config or OpticalConfig()
    power = _nonnegative(mean_photons, "mean_photons") / config.photons_per_watt
    return float(power) if power.ndim == 0 else power
