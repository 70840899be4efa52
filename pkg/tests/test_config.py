"""Tests for configuration loading and environment overrides."""

import os
from pathlib import Path

import pytest

from src.config import Config, load_config
from src.estimation import FitConfig
from src.loaders import OpticalConfig
from src.selection import SelectionConfig
from src.utils.exceptions import ConfigurationError
from src.utils.helpers import validate_config

PROJECT_CONFIG = Path(__file__).parent.parent / "config.yaml"


def test_project_config_loads_and_validates():
    config = load_config(environ={})
    assert validate_config(config.as_dict())
    assert config.get_optics_config() == OpticalConfig()
    assert config.get_fit_config() == FitConfig()
    assert config.get_selection_config() == SelectionConfig()
    assert config.get_sweep_config().dominance_threshold == 0.01
    assert config.get_synthesis_config()["trials_per_point"] == 10_000_000
    assert config.get_report_config()["format"] == "yaml"
    assert config.get_paths_config() == {"reports": "data/reports"}
    assert config.get_logging_config()["level"] == "INFO"


def test_dotted_get():
    config = Config({"fit": {"n_starts": 3}, "report": None})
    assert config.get("fit.n_starts") == 3
    assert config.get("fit.missing", "fallback") == "fallback"
    assert config.get("report.format", "yaml") == "yaml"
    assert config.get_report_config() == {}


def test_environment_overrides_are_typed():
    environ = {
        "EPDC_FIT__N_STARTS": "16",
        "EPDC_FIT__PIN_P0": "true",
        "EPDC_OPTICS__REPETITION_RATE": "1.0e+6",
        "EPDC_SELECTION__RULE": "bic",
        "EPDC_NEW_SECTION__KEY": "value",
        "OTHER_FIT__N_STARTS": "99",
    }
    config = load_config(str(PROJECT_CONFIG), environ=environ)
    assert config.get_fit_config().n_starts == 16
    assert config.get_fit_config().pin_p0 is True
    assert config.get_optics_config().repetition_rate == 1e6
    assert config.get_selection_config().rule == "bic"
    assert config.get("new_section.key") == "value"


def test_malformed_override_variable():
    with pytest.raises(ConfigurationError):
        load_config(str(PROJECT_CONFIG), environ={"EPDC_FIT____N_STARTS": "3"})


def test_dotenv_next_to_config(tmp_path):
    config_path = tmp_path / "config.yaml"
    config_path.write_text(PROJECT_CONFIG.read_text())
    (tmp_path / ".env").write_text("EPDC_SWEEP__DOMINANCE_THRESHOLD=0.05\n")
    try:
        config = load_config(str(config_path))
        assert config.get_sweep_config().dominance_threshold == 0.05
    finally:
        os.environ.pop("EPDC_SWEEP__DOMINANCE_THRESHOLD", None)


def test_invalid_config_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.yaml"))
    broken = tmp_path / "broken.yaml"
    broken.write_text("fit: [unclosed\n")
    with pytest.raises(ConfigurationError):
        load_config(str(broken), environ={})
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("just text\n")
    with pytest.raises(ConfigurationError):
        load_config(str(scalar), environ={})


def test_unknown_keys_in_sections():
    config = Config({"fit": {"n_start": 3}, "selection": {"rule": "chi3"}})
    with pytest.raises(ConfigurationError):
        config.get_fit_config()
    with pytest.raises(ConfigurationError):
        config.get_selection_config()


@pytest.mark.parametrize(
    "change",
    [
        {"fit": None},
        {"selection": {"i_max_min": 3, "i_max_max": 1}},
        {"report": {"format": "xml"}},
    ],
)
def test_validate_config_rejects(change):
    document = load_config(environ={}).as_dict()
    document.update(change)
    with pytest.raises(ConfigurationError):
        validate_config(document)
