"""
Exception hierarchy for the EPDC toolkit.
Every error carries the CLI exit code it maps to.
"""

from typing import Any, List, Optional, Sequence


class EpdcError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


class ValidationError(EpdcError, ValueError):
    """Invalid model, distribution, dataset or configuration values."""

    exit_code = 2


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class ArityError(ValidationError):
    """Too few data points, rows or entries for the requested operation."""


class IdentifiabilityError(ValidationError):
    """Data carries no information about the fitted parameters."""


class ConfigurationError(ValidationError):
    """Malformed configuration file or section."""


class TailMassError(ValidationError):
    """Photon-number cutoff leaves too much Poisson mass unaccounted for."""


class NoCrossoverError(ValidationError):
    """Two photon-number contributions never become equal."""


class ParseError(ValidationError):
    """Malformed input file."""

    def __init__(self, message: str, line: Optional[int] = None):
        """
        Initialize parse error.

        Args:
            message: Human-readable description
            line: 1-based line number in the offending file, if known
        """
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnitError(ParseError):
    """Missing, unrecognized or conflicting unit declaration."""


class ConvergenceError(EpdcError, RuntimeError):
    """Optimizer failed on every start; carries the best state reached."""

    exit_code = 3

    def __init__(self, message: str, best_fit: Any = None):
        super().__init__(message)
        self.best_fit = best_fit


class SingularCovarianceError(EpdcError, ArithmeticError):
    """Parameter covariance is singular for the named parameters."""

    exit_code = 2

    def __init__(self, message: str, parameters: Sequence[str] = ()):
        super().__init__(message)
        self.parameters: List[str] = list(parameters)


class SelectionError(EpdcError, RuntimeError):
    """No candidate in the ladder satisfies the acceptance rule."""

    exit_code = 4

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report
