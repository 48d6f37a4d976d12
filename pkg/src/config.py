"""Configuration via environment variables and run config files."""

from __future__ import annotations

from enum import StrEnum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings

from .errors import ConfigurationError
from .network import BoundaryCondition, FluxKind


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Output
    output_dir: Path = Path("./output")
    log_level: str = "INFO"

    # Coupling solver
    eps_reg: float = 1e-12
    node_flux_tolerance: float = 1e-12

    # Subcharacteristic sampling
    wave_speed_samples: int = 1001

    # Convergence study fan-out
    max_workers: int = 4


_settings: Settings | None = None


def get_settings() -> Settings:
    """Load and cache settings from environment."""
    global _settings  # noqa: PLW0603
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Reset cached settings (useful for testing)."""
    global _settings  # noqa: PLW0603
    _settings = None


def format_float(value: float) -> str:
    """Shortest stable text for a float: 17 significant digits."""
    return f"{float(value):.17g}"


class Preset(StrEnum):
    BURGERS = "burgers"
    BURGERS_CONVERGENCE = "burgers-convergence"
    TRAFFIC_FREE_FLOW = "traffic-free-flow"
    TRAFFIC_CONGESTION = "traffic-congestion"
    BUCKLEY_LEVERETT = "buckley-leverett"
    CUSTOM = "custom"


class SchemeOrder(StrEnum):
    FIRST = "first"
    MUSCL = "muscl"
    MUSCL_TVD = "muscl-tvd"


class CouplingMode(StrEnum):
    CENTRAL = "central"
    FLOWMAX = "flowmax"
    ADJACENT = "adjacent"


class FluxSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: FluxKind
    u_max: float = Field(default=1.0, gt=0)


class StepProfile(BaseModel):
    """Piecewise constant initial data: `left` for x <= at, `right` beyond."""

    model_config = ConfigDict(extra="forbid")

    at: float
    left: float
    right: float


InitialSpec = float | StepProfile


# Values the presets fill in when neither the YAML file nor a flag sets them.
PRESET_DEFAULTS: dict[Preset, dict[str, Any]] = {
    Preset.BURGERS: {
        "scheme": SchemeOrder.FIRST,
        "m": 200,
        "lam": 1.0,
        "t_end": 0.75,
        "snapshots": [0.2, 0.5, 0.75],
    },
    Preset.BURGERS_CONVERGENCE: {
        "m": 100,
        "lam": 1.0,
        "t_end": 0.5,
        "resolutions": [100, 200, 400, 800],
        "cfl": 0.49,
        "fixed_dt": 2e-6,
    },
    Preset.TRAFFIC_FREE_FLOW: {
        "scheme": SchemeOrder.FIRST,
        "m": 200,
        "lam": 1.0,
        "cfl": 0.49,
        "eps_reg": 0.0,
    },
    Preset.TRAFFIC_CONGESTION: {
        "scheme": SchemeOrder.FIRST,
        "m": 200,
        "lam": 1.0,
        "cfl": 0.2,
        "eps_reg": 0.0,
    },
    Preset.BUCKLEY_LEVERETT: {
        "scheme": SchemeOrder.MUSCL,
        "m": 300,
        "lam": 2.5,
        "cfl": 0.49,
    },
    Preset.CUSTOM: {"scheme": SchemeOrder.FIRST, "cfl": 0.49},
}

# Burgers CFL numbers depend on the scheme order.
BURGERS_CFL = {SchemeOrder.FIRST: 0.9, SchemeOrder.MUSCL: 0.2, SchemeOrder.MUSCL_TVD: 0.2}

CUSTOM_REQUIRED = ("incoming", "outgoing", "initial", "t_end", "m", "lam")


class RunConfig(BaseModel):
    """Effective description of one experiment; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    preset: Preset = Preset.BURGERS
    scheme: SchemeOrder | None = None
    coupling: CouplingMode = CouplingMode.CENTRAL
    m: int | None = Field(default=None, ge=2)
    cfl: float | None = Field(default=None, gt=0, le=1)
    fixed_dt: float | None = Field(default=None, gt=0)
    lam: float | list[float] | None = None
    t_end: float | None = Field(default=None, ge=0)
    snapshots: list[float] = Field(default_factory=list)
    beta: float = Field(default=0.5, ge=0, le=1)
    eps_reg: float | None = Field(default=None, ge=0)
    equalize_speeds: bool = False
    resolutions: list[int] | None = None
    output_dir: Path | None = None

    # Custom topology
    incoming: list[FluxSpec] | None = None
    outgoing: list[FluxSpec] | None = None
    initial: list[InitialSpec] | None = None
    boundary: list[BoundaryCondition] | None = None
    alpha: list[list[float]] | None = None

    @model_validator(mode="after")
    def _check_required(self) -> RunConfig:
        if self.preset is Preset.CUSTOM:
            missing = [name for name in CUSTOM_REQUIRED if getattr(self, name) is None]
            if missing:
                msg = f"Custom preset is missing required fields: {', '.join(missing)}"
                raise ValueError(msg)
            assert self.incoming is not None and self.outgoing is not None
            n_edges = len(self.incoming) + len(self.outgoing)
            if self.initial is not None and len(self.initial) != n_edges:
                msg = f"Expected {n_edges} initial states, got {len(self.initial)}"
                raise ValueError(msg)
        if self.coupling is CouplingMode.FLOWMAX and self.preset not in (
            Preset.TRAFFIC_FREE_FLOW,
            Preset.TRAFFIC_CONGESTION,
        ):
            msg = "Flow maximization coupling is only available for the traffic presets"
            raise ValueError(msg)
        return self


def _with_defaults(values: dict[str, Any]) -> dict[str, Any]:
    try:
        preset = Preset(values.get("preset", Preset.BURGERS))
    except ValueError as e:
        msg = f"Unknown preset '{values.get('preset')}'"
        raise ConfigurationError(msg) from e
    merged = {**PRESET_DEFAULTS[preset], **values, "preset": preset}
    if preset is Preset.BURGERS and merged.get("cfl") is None:
        merged["cfl"] = BURGERS_CFL[SchemeOrder(merged["scheme"])]
    if merged.get("t_end") is not None and not merged.get("snapshots"):
        merged["snapshots"] = [merged["t_end"]]
    return merged


def load_config_file(path: Path) -> dict[str, Any]:
    """Read a YAML run config into a plain mapping."""
    if not path.exists():
        msg = f"Config file not found: {path}"
        raise ConfigurationError(msg)
    with open(path) as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        msg = f"Config file {path} must contain a mapping"
        raise ConfigurationError(msg)
    return data


def parse_config(path: Path | None = None, **flags: Any) -> RunConfig:
    """Merge preset defaults <- YAML file <- flags into a validated RunConfig.

    Flags set to None are treated as absent.
    """
    values: dict[str, Any] = load_config_file(path) if path is not None else {}
    values.update({key: value for key, value in flags.items() if value is not None})
    try:
        return RunConfig.model_validate(_with_defaults(values))
    except ValidationError as e:
        msg = f"Invalid run config: {e}"
        raise ConfigurationError(msg) from e


def dump_config(config: RunConfig, path: Path) -> Path:
    """Echo the effective config as YAML; it re-parses to an equal RunConfig."""
    path.parent.mkdir(parents=True, exist_ok=True)
    data = config.model_dump(mode="json", exclude_none=True)
    with open(path, "w") as f:
        yaml.safe_dump(data, f, sort_keys=True)
    return path
