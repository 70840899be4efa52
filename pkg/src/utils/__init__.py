"""Utility functions and the error hierarchy of the EPDC Toolkit."""

from .exceptions import (
    ArityError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    EpdcError,
    IdentifiabilityError,
    NoCrossoverError,
    ParseError,
    SelectionError,
    SingularCovarianceError,
    TailMassError,
    UnitError,
    ValidationError,
)
from .helpers import ensure_directories, ordered_map, setup_logging, validate_config

__all__ = [
    "ArityError",
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "EpdcError",
    "IdentifiabilityError",
    "NoCrossoverError",
    "ParseError",
    "SelectionError",
    "SingularCovarianceError",
    "TailMassError",
    "UnitError",
    "ValidationError",
    "ensure_directories",
    "ordered_map",
    "setup_logging",
    "validate_config",
]
