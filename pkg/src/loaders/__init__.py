"""Count-table loaders and optical unit conversion."""

from .count_loader import CountRateLoader, ingest, write_dataset
from .optics import OpticalConfig, mean_photons_to_power, power_to_mean_photons

__all__ = [
    "CountRateLoader",
    "OpticalConfig",
    "ingest",
    "mean_photons_to_power",
    "power_to_mean_photons",
    "write_dataset",
]
