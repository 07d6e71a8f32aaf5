# decoherence_lab/config.py

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigNotFoundError, ConfigValidationError
from .models import MapOrder

logger = logging.getLogger(__name__)

# --- Configuration ---
DEFAULT_OUTPUT_DIR = "runs"
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_GAMMA_INV = [0.0, 0.2, 0.5, 0.8]

ScenarioName = Literal["interference", "tunnel", "bouncer", "arrival", "entropy", "wigner", "ehrenfest"]

REQUIRED_PHYSICS: Dict[str, List[str]] = {
    "interference": ["sigma0", "x0", "p0"],
    "tunnel": ["sigma0", "x0", "p0", "V0", "L"],
    "bouncer": ["sigma0", "z0"],
    "arrival": ["sigma0", "x0", "p0"],
    "entropy": ["sigma0", "z0"],
    "wigner": ["sigma0", "x0", "p0"],
    "ehrenfest": ["x0", "p0"],
}
MOVING_PACKET_SCENARIOS = ("tunnel", "arrival")


def env_output_dir() -> str:
    return os.getenv("DECOHERENCE_LAB_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)


def env_log_level() -> str:
    return os.getenv("DECOHERENCE_LAB_LOG_LEVEL", DEFAULT_LOG_LEVEL)


class PhysicsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hbar: float = Field(1.0, gt=0)
    mass: Optional[float] = Field(None, gt=0)
    sigma0: Optional[float] = Field(None, gt=0)
    x0: Optional[float] = None
    p0: Optional[float] = None
    z0: Optional[float] = Field(None, gt=0)
    V0: Optional[float] = Field(None, gt=0)
    L: Optional[float] = Field(None, gt=0)
    g: Optional[float] = Field(None, gt=0)
    omega: Optional[float] = Field(None, gt=0)
    c1: Optional[float] = None
    detector_x: float = 0.0
    converging: bool = True


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    momentum_points: int = Field(512, ge=16)
    k_points: int = Field(400, ge=16)
    x_points: int = Field(801, ge=3)
    time_points: Optional[int] = Field(None, ge=2)
    n_max: int = Field(10, ge=1, le=50)
    R_points: int = Field(201, ge=5)
    u_points: int = Field(161, ge=5)

    @model_validator(mode="after")
    def _odd_phase_space_grids(self):
        for name in ("R_points", "u_points"):
            if getattr(self, name) % 2 == 0:
                raise ValueError(f"{name} must be odd for Simpson integration")
        return self


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    output_dir: Optional[str] = None
    log_level: Optional[str] = None


class ScenarioConfig(BaseModel):
    """Validated scenario file; every level rejects unknown keys."""
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioName
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    gamma_inv_list: List[float] = Field(default_factory=lambda: list(DEFAULT_GAMMA_INV), min_length=1)
    map_order: MapOrder = MapOrder.FIRST_ORDER
    times: Optional[List[float]] = None
    grids: GridSection = Field(default_factory=GridSection)
    run: RunSection = Field(default_factory=RunSection)

    @model_validator(mode="after")
    def _check_scenario_requirements(self):
        missing = [key for key in REQUIRED_PHYSICS[self.scenario] if getattr(self.physics, key) is None]
        if missing:
            raise ValueError(f"scenario '{self.scenario}' needs physics.{', physics.'.join(missing)}")
        if any(g < 0 for g in self.gamma_inv_list):
            raise ValueError("gamma_inv_list entries must be >= 0")
        if self.times is not None:
            if any(t < 0 for t in self.times):
                raise ValueError("times must be >= 0")
            if any(b <= a for a, b in zip(self.times, self.times[1:])):
                raise ValueError("times must be strictly increasing")
        if self.scenario == "ehrenfest" and self.physics.g is None and self.physics.omega is None:
            raise ValueError("scenario 'ehrenfest' needs physics.g or physics.omega")
        if self.scenario == "tunnel" and self.physics.x0 is not None and self.physics.x0 >= 0:
            raise ValueError("tunnel packet must start left of the barrier (physics.x0 < 0)")
        if self.scenario in MOVING_PACKET_SCENARIOS and self.physics.p0 is not None and self.physics.p0 <= 0:
            raise ValueError(f"scenario '{self.scenario}' needs a packet moving right (physics.p0 > 0)")
        if self.scenario == "arrival" and self.physics.x0 is not None and self.physics.detector_x <= self.physics.x0:
            raise ValueError("physics.detector_x must lie right of the packet start physics.x0")
        return self

    @property
    def output_dir(self) -> str:
        return self.run.output_dir or env_output_dir()

    @property
    def log_level(self) -> str:
        return self.run.log_level or env_log_level()


def format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


def validate_config(raw: Dict[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigValidationError(format_validation_error(e)) from e


def load_config(
    path: str, overrides: Optional[Dict[str, Any]] = None, scenario: Optional[str] = None
) -> ScenarioConfig:
    """
    Reads a YAML scenario file and validates it.

    Args:
        path: location of the YAML file.
        overrides: top-level keys (gamma_inv_list, map_order) and
            `run` entries that replace the file's values before validation.
        scenario: the scenario requested on the command line; fills a missing
            `scenario` key and must match a present one.

    Raises:
        ConfigNotFoundError: the file does not exist.
        ConfigValidationError: YAML syntax error or invalid content.
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigNotFoundError(f"Config file not found: {path}")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigValidationError(f"Cannot parse {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigValidationError(f"{path} must contain a mapping at the top level")
    if scenario is not None:
        declared = raw.setdefault("scenario", scenario)
        if declared != scenario:
            raise ConfigValidationError(f"{path} configures scenario '{declared}', not '{scenario}'")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "run":
            raw["run"] = dict(raw.get("run") or {})
            raw["run"].update({k: v for k, v in value.items() if v is not None})
        else:
            raw[key] = value
    config = validate_config(raw)
    logger.debug(f"Loaded {config.scenario} config from {path}")
    return config
