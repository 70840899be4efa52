"""
Configuration loader for the EPDC Toolkit.
Handles loading and validation of configuration from YAML file.
"""

import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml
from dotenv import load_dotenv

from ..estimation import FitConfig
from ..loaders.optics import OpticalConfig
from ..selection import SelectionConfig
from ..sweep import SweepConfig
from ..utils.exceptions import ConfigurationError

ENV_PREFIX = "EPDC_"
ENV_SEPARATOR = "__"


class Config:
    """Configuration class for the EPDC Toolkit."""

    def __init__(self, config_dict: Dict[str, Any]):
        """
        Initialize configuration from dictionary.

        Args:
            config_dict: Dictionary containing configuration values
        """
        self._config = config_dict

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by dot-separated key path.

        Args:
            key: Dot-separated key path (e.g., 'fit.max_iterations')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
                if value is None:
                    return default
            else:
                return default

        return value

    def as_dict(self) -> Dict[str, Any]:
        return self._config

    def get_optics_config(self) -> OpticalConfig:
        """Get optical setup configuration."""
        return OpticalConfig.from_dict(self._config.get('optics'))

    def get_fit_config(self) -> FitConfig:
        """Get candidate fit configuration."""
        return FitConfig.from_dict(self._config.get('fit'))

    def get_selection_config(self) -> SelectionConfig:
        """Get model ladder configuration."""
        return SelectionConfig.from_dict(self._config.get('selection'))

    def get_sweep_config(self) -> SweepConfig:
        return SweepConfig.from_dict(self._config.get('sweep'))

    def get_synthesis_config(self) -> Dict[str, Any]:
        """Get synthetic bench defaults."""
        return self._config.get('synthesis') or {}

    def get_report_config(self) -> Dict[str, Any]:
        return self._config.get('report') or {}

    def get_paths_config(self) -> Dict[str, Any]:
        """Get paths configuration."""
        return self._config.get('paths') or {}

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration."""
        return self._config.get('logging') or {}


def load_config(config_path: Optional[str] = None, environ: Optional[Mapping[str, str]] = None) -> Config:
    """
    Load configuration from YAML file.

    A ``.env`` file next to the configuration is read first, then
    ``EPDC_`` environment variables override file values.

    Args:
        config_path: Path to configuration file. If None, uses default config.yaml
        environ: Environment to read overrides from (defaults to os.environ)

    Returns:
        Config object

    Raises:
        FileNotFoundError: If configuration file not found
        ConfigurationError: If the file is not valid YAML or not a mapping
    """
    if config_path is None:
        # Default to config.yaml in project root
        project_root = Path(__file__).parent.parent.parent
        config_path = project_root / "config.yaml"

    config_path = Path(config_path)

    if not config_path.exists():
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    env_file = config_path.parent / ".env"
    if env_file.exists():
        load_dotenv(env_file, override=False)

    with open(config_path, 'r', encoding='utf-8') as f:
        try:
            config_dict = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"{config_path}: invalid YAML: {e}")

    if not isinstance(config_dict, dict):
        raise ConfigurationError(f"{config_path}: configuration must be a mapping")

    # Load environment variable overrides
    _apply_env_overrides(config_dict, os.environ if environ is None else environ)

    return Config(config_dict)


def _apply_env_overrides(config_dict: Dict[str, Any], environ: Mapping[str, str]) -> None:
    """
    Apply environment variable overrides to configuration.

    Environment variables are prefixed with EPDC_ and use a double
    underscore between nesting levels (e.g., EPDC_FIT__MAX_ITERATIONS), so
    single underscores inside key names survive. Values are parsed as YAML
    scalars to keep numbers and booleans typed.

    Args:
        config_dict: Configuration dictionary to update
        environ: Environment mapping
    """
    for env_key in sorted(environ):
        if not env_key.startswith(ENV_PREFIX):
            continue
        key_path = env_key[len(ENV_PREFIX):].lower().split(ENV_SEPARATOR)
        if not all(key_path):
            raise ConfigurationError(f"malformed override variable {env_key}")

        # Navigate to the right place in config dict
        current = config_dict
        for key in key_path[:-1]:
            if not isinstance(current.get(key), dict):
                current[key] = {}
            current = current[key]

        try:
            current[key_path[-1]] = yaml.safe_load(environ[env_key])
        except yaml.YAMLError:
            current[key_path[-1]] = environ[env_key]
