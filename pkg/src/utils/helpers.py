"""
Utility functions for the EPDC toolkit.
Includes logging setup, configuration validation, and helper functions.
"""

import dataclasses
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Type, TypeVar

from .exceptions import ConfigurationError

T = TypeVar("T")
R = TypeVar("R")


def setup_logging(
    level: str = "INFO",
    log_format: Optional[str] = None,
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Set up logging configuration for the application.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_format: Log message format string
        log_file: Path to log file (if None, logs to stderr only)

    Returns:
        Configured logger instance
    """
    if log_format is None:
        log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Convert string level to logging constant
    numeric_level = getattr(logging, str(level).upper(), logging.INFO)

    # Configure root logger; library modules log through getLogger(__name__)
    logging.basicConfig(
        level=numeric_level,
        format=log_format,
    )
    logging.getLogger().setLevel(numeric_level)

    logger = logging.getLogger("epdc")
    logger.setLevel(numeric_level)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(logging.Formatter(log_format))
        logging.getLogger().addHandler(file_handler)

    return logger


REQUIRED_SECTIONS = ["optics", "fit", "selection", "synthesis", "sweep", "report"]


def validate_config(config: Dict[str, Any]) -> bool:
    """
    Validate configuration dictionary.

    Args:
        config: Configuration dictionary to validate

    Returns:
        True if configuration is valid

    Raises:
        ConfigurationError: If configuration is invalid
    """
    if not isinstance(config, dict):
        raise ConfigurationError("configuration must be a mapping")

    for key in REQUIRED_SECTIONS:
        if key not in config:
            raise ConfigurationError(f"Missing required configuration key: {key}")
        if not isinstance(config[key], dict):
            raise ConfigurationError(f"configuration section {key!r} must be a mapping")

    selection = config["selection"]
    low = selection.get("i_max_min", 1)
    high = selection.get("i_max_max", 6)
    if int(low) < 0 or int(high) < int(low):
        raise ConfigurationError(f"selection i_max range [{low}, {high}] is empty or negative")

    report_format = config["report"].get("format", "yaml")
    if str(report_format).lower() not in ("yaml", "json"):
        raise ConfigurationError(f"report.format must be yaml or json, got {report_format!r}")

    return True


def ensure_directories(paths_config: Dict[str, str]) -> None:
    """
    Ensure all required directories exist.

    Args:
        paths_config: Dictionary of path configurations
    """
    for path_name, path_value in paths_config.items():
        path = Path(path_value)
        path.mkdir(parents=True, exist_ok=True)


def dataclass_from_dict(cls: Type[T], data: Optional[Dict[str, Any]], section: str) -> T:
    """
    Build a config dataclass from a YAML section, rejecting unknown keys.

    Args:
        cls: Dataclass type to instantiate
        data: Section contents (None means all defaults)
        section: Section name used in error messages

    Returns:
        Instance of ``cls``

    Raises:
        ConfigurationError: On unknown keys or invalid values
    """
    data = dict(data or {})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown keys in {section!r} section: {', '.join(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"invalid {section!r} section: {e}")


def resolve_threads(threads: Optional[int]) -> int:
    """Worker count; None or 0 means all cores."""
    if not threads:
        return os.cpu_count() or 1
    return max(1, int(threads))


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply ``func`` to every item, possibly concurrently.

    Results come back in input order whatever the worker count, so any
    reduction over them is deterministic.
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
