"""Tests for configuration manager."""

import pytest
import os
import tempfile
import yaml
from pathlib import Path
from pydantic import ValidationError
from src.config_manager import ConfigManager, Config, CohomologyConfig
from src.constants import DEFAULT_AUTOMORPHISM_CAP, DEFAULT_ORDER_CAP

ENV_VARS = ["METRIC_TOOLKIT_CAP", "METRIC_TOOLKIT_ORDER_CAP", "METRIC_TOOLKIT_WORKERS"]


@pytest.fixture(autouse=True)
def clean_env():
    """Keep override variables from leaking between tests."""
    saved = {name: os.environ.pop(name) for name in ENV_VARS if name in os.environ}
    yield
    for name in ENV_VARS:
        os.environ.pop(name, None)
    os.environ.update(saved)


def test_config_defaults():
    """Test configuration with defaults."""
    with tempfile.TemporaryDirectory() as tmpdir:
        # Create empty config file
        config_path = Path(tmpdir) / "toolkit.yaml"
        config_path.write_text("")

        config = ConfigManager(str(config_path))

        assert config.config is not None
        assert config.get_automorphism_cap() == DEFAULT_AUTOMORPHISM_CAP
        assert config.get_order_cap() == DEFAULT_ORDER_CAP
        assert config.get_coefficients() == "scalars"
        assert config.get_em_modulus() is None
        assert config.get_seed() == 0
        assert config.include_timing() is False
        assert config.get_output_format() == "json"


def test_config_missing_file():
    """Test a missing file falls back to defaults."""
    with tempfile.TemporaryDirectory() as tmpdir:
        config = ConfigManager(str(Path(tmpdir) / "absent.yaml"))
        assert config.get_workers() == 4


def test_config_loading():
    """Test loading configuration from YAML."""
    with tempfile.TemporaryDirectory() as tmpdir:
        config_path = Path(tmpdir) / "toolkit.yaml"
        config_data = {
            "caps": {"automorphism": 100, "subgroup": 64, "clifford": 500},
            "cohomology": {"coefficients": "muN:16", "em_modulus": 8},
            "run": {"seed": 7, "workers": 2, "timing": True, "output_format": "tsv"},
        }
        config_path.write_text(yaml.dump(config_data))

        config = ConfigManager(str(config_path))

        assert config.get_automorphism_cap() == 100
        assert config.get_subgroup_cap() == 64
        assert config.get_clifford_cap() == 500
        assert config.get_coefficients() == "muN:16"
        assert config.get_em_modulus() == 8
        assert config.get_seed() == 7
        assert config.get_workers() == 2
        assert config.include_timing() is True
        assert config.get_output_format() == "tsv"


def test_config_env_vars():
    """Test environment variable overrides."""
    os.environ["METRIC_TOOLKIT_CAP"] = "64"
    os.environ["METRIC_TOOLKIT_ORDER_CAP"] = "720"
    os.environ["METRIC_TOOLKIT_WORKERS"] = "8"

    with tempfile.TemporaryDirectory() as tmpdir:
        config_path = Path(tmpdir) / "toolkit.yaml"
        config_path.write_text(yaml.dump({"caps": {"automorphism": 100}, "run": {"workers": 2}}))

        config = ConfigManager(str(config_path))

        assert config.get_automorphism_cap() == 64
        assert config.get_order_cap() == 720
        assert config.get_workers() == 8


def test_config_invalid_env_vars_ignored():
    """Test non-integer and non-positive overrides fall back to the file."""
    os.environ["METRIC_TOOLKIT_CAP"] = "lots"
    os.environ["METRIC_TOOLKIT_WORKERS"] = "0"

    with tempfile.TemporaryDirectory() as tmpdir:
        config_path = Path(tmpdir) / "toolkit.yaml"
        config_path.write_text("")

        config = ConfigManager(str(config_path))

        assert config.get_automorphism_cap() == DEFAULT_AUTOMORPHISM_CAP
        assert config.get_workers() == 4


def test_config_validation():
    """Test out-of-range values are rejected."""
    with pytest.raises(ValidationError):
        Config(caps={"automorphism": 0})
    with pytest.raises(ValidationError):
        Config(run={"workers": 65})
    with pytest.raises(ValidationError):
        Config(run={"output_format": "xml"})
    with pytest.raises(ValidationError):
        CohomologyConfig(coefficients="integers")


def test_config_invalid_yaml_values():
    """Test a bad file value surfaces as a validation error."""
    with tempfile.TemporaryDirectory() as tmpdir:
        config_path = Path(tmpdir) / "toolkit.yaml"
        config_path.write_text(yaml.dump({"caps": {"subgroup": -1}}))

        with pytest.raises(ValidationError):
            ConfigManager(str(config_path))


def test_shipped_config_loads():
    """Test the repository's config/toolkit.yaml parses."""
    config = ConfigManager("config/toolkit.yaml")
    assert config.get_subgroup_cap() == 256
    assert config.get_matrix_cap() == 2000000
