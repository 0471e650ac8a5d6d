"""Configuration management for the metric group toolkit."""

import os
import yaml
from pathlib import Path
from typing import Literal, Optional
from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator
from agentstr.logger import get_logger

from .constants import (
    DEFAULT_AUTOMORPHISM_CAP,
    DEFAULT_CLIFFORD_CAP,
    DEFAULT_MATRIX_ENTRY_CAP,
    DEFAULT_ORDER_CAP,
    DEFAULT_SEED,
    DEFAULT_SUBGROUP_CAP,
    DEFAULT_WORKERS,
)

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = "config/toolkit.yaml"


class CapsConfig(BaseModel):
    """Enumeration and table-size caps."""
    automorphism: int = Field(default=DEFAULT_AUTOMORPHISM_CAP, ge=1)
    subgroup: int = Field(default=DEFAULT_SUBGROUP_CAP, ge=1)
    order: int = Field(default=DEFAULT_ORDER_CAP, ge=1)
    matrix_entries: int = Field(default=DEFAULT_MATRIX_ENTRY_CAP, ge=1)
    clifford: int = Field(default=DEFAULT_CLIFFORD_CAP, ge=1)


class CohomologyConfig(BaseModel):
    """Coefficient and modulus policy."""
    coefficients: str = "scalars"
    em_modulus: Optional[int] = Field(default=None, ge=1)

    @field_validator("coefficients")
    @classmethod
    def _known_policy(cls, value: str) -> str:
        if value != "scalars" and not value.startswith("muN:"):
            raise ValueError(f"coefficients must be 'scalars' or 'muN:<N>', got {value!r}")
        return value


class RunConfig(BaseModel):
    """Batch execution settings."""
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    workers: int = Field(default=DEFAULT_WORKERS, ge=1, le=64)
    timing: bool = False
    output_format: Literal["json", "tsv"] = "json"


class Config(BaseModel):
    """Main configuration model."""
    caps: CapsConfig = Field(default_factory=CapsConfig)
    cohomology: CohomologyConfig = Field(default_factory=CohomologyConfig)
    run: RunConfig = Field(default_factory=RunConfig)


def _env_int(name: str) -> Optional[int]:
    raw = os.getenv(name, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not an integer")
        return None
    if value < 1:
        logger.warning(f"Ignoring {name}={value}: must be positive")
        return None
    return value


class ConfigManager:
    """Manages configuration loading and access."""

    def __init__(self, config_path: str = DEFAULT_CONFIG_PATH):
        """Initialize configuration manager.

        Args:
            config_path: Path to YAML configuration file. A missing file
                means built-in defaults.
        """
        load_dotenv()

        self.config_path = Path(config_path)
        self.config: Optional[Config] = None
        self._load_config()

    def _load_config(self):
        """Load configuration from YAML file."""
        if self.config_path.exists():
            with open(self.config_path, 'r') as f:
                data = yaml.safe_load(f) or {}
            self.config = Config(**data)
            logger.info(f"Loaded configuration from {self.config_path}")
        else:
            self.config = Config()

    def get_automorphism_cap(self) -> int:
        """Cap on |A| for automorphism, form and isometry enumeration.

        ``METRIC_TOOLKIT_CAP`` overrides the file value.
        """
        return _env_int("METRIC_TOOLKIT_CAP") or self.config.caps.automorphism

    def get_subgroup_cap(self) -> int:
        return self.config.caps.subgroup

    def get_order_cap(self) -> int:
        """Largest root-of-unity order; ``METRIC_TOOLKIT_ORDER_CAP`` overrides."""
        return _env_int("METRIC_TOOLKIT_ORDER_CAP") or self.config.caps.order

    def get_matrix_cap(self) -> int:
        return self.config.caps.matrix_entries

    def get_clifford_cap(self) -> int:
        return self.config.caps.clifford

    def get_coefficients(self) -> str:
        return self.config.cohomology.coefficients

    def get_em_modulus(self) -> Optional[int]:
        return self.config.cohomology.em_modulus

    def get_seed(self) -> int:
        return self.config.run.seed

    def get_workers(self) -> int:
        """Batch worker count; ``METRIC_TOOLKIT_WORKERS`` overrides."""
        return _env_int("METRIC_TOOLKIT_WORKERS") or self.config.run.workers

    def include_timing(self) -> bool:
        return self.config.run.timing

    def get_output_format(self) -> str:
        return self.config.run.output_format
