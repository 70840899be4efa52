"""Configuration management for the EPDC Toolkit."""

from .config_loader import load_config, Config

__all__ = ["load_config", "Config"]
