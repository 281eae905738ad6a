"""Declarative run configurations for the CLI workflows.

A run configuration is read from a ``.toml`` or ``.json`` file and merged with
command-line flags (flags win). Validation is complete before any file is written.
"""

import json
import sys
from pathlib import Path
from typing import Any, Literal, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..exceptions import CnarValidationError
from .presets import EXAMPLE_GAMMA, get_preset

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

C = TypeVar("C", bound="RunConfig")


class RunConfig(BaseModel):
    """Common base: versioned schema, unknown keys rejected."""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = 1
    seed: int = Field(default=2024, ge=0, lt=2**64)
    out: str = "output"


class SimulateConfig(RunConfig):
    example: int | None = Field(default=None, ge=1, le=5)
    generator: Literal["sbm", "spectral_forge", "powerlaw_cluster", "random_partition"] = "sbm"
    dgp: Literal["cnar", "nar"] = "cnar"
    n: int = Field(default=200, ge=2)
    k: int = Field(default=2, ge=1)
    t_len: int = Field(default=200, ge=2, description="Number of kept time points (needs a lag)")
    burn_in: int = Field(default=200, ge=0)
    alpha_n: float = Field(default=0.9, gt=0.0, le=1.0)
    rho: float = Field(default=8 / 9, ge=0.0, le=1.0)
    b1_diag: list[float] | None = None
    beta1: float = 0.5
    beta2: float = 0.3
    gamma: list[float] = Field(default_factory=lambda: list(EXAMPLE_GAMMA))
    m: int = Field(default=3, ge=0)
    sigma_e: float = Field(default=1.0, gt=0.0)
    noiseless: bool = False
    basis: Literal["membership", "embedding"] = "membership"

    @model_validator(mode="after")
    def _check_shapes(self) -> "SimulateConfig":
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        if self.b1_diag is not None and len(self.b1_diag) != self.k:
            raise ValueError(f"b1_diag has {len(self.b1_diag)} entries, expected k={self.k}")
        return self


class FitConfig(RunConfig):
    panel_dir: str
    k: int = Field(default=2, ge=1)
    step: Literal[1, 2] = 2
    factors: int = Field(default=3, ge=1)
    p: int | None = Field(default=None, ge=0, description="Expected covariate count")

    @model_validator(mode="after")
    def _check_files(self) -> "FitConfig":
        _require_panel_files(self.panel_dir)
        return self


class BacktestConfig(RunConfig):
    panel_dir: str
    k: int = Field(default=2, ge=1)
    factors: int = Field(default=3, ge=1)
    t_train: int = Field(default=150, ge=2)
    t_test: int = Field(default=25, ge=1)
    stride: int | None = Field(default=None, ge=1)
    method: Literal["cnar1", "cnar2", "nar", "all"] = "all"
    p: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_files(self) -> "BacktestConfig":
        _require_panel_files(self.panel_dir)
        return self


class DiagnoseConfig(RunConfig):
    panel_dir: str
    k: int = Field(default=2, ge=1, description="Communities used for the residual fit")
    k_max: int = Field(default=8, ge=1)
    m_max: int = Field(default=8, ge=1)
    p: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_files(self) -> "DiagnoseConfig":
        _require_panel_files(self.panel_dir)
        return self


class BenchmarkConfig(RunConfig):
    example: int = Field(default=1, ge=1, le=5)
    n: list[int] | None = None
    t: list[int] | None = None
    k: list[int] | None = None
    reps: int = Field(default=20, ge=1)
    workers: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_grid(self) -> "BenchmarkConfig":
        for name in ("n", "t", "k"):
            values = getattr(self, name)
            if values is not None and (not values or min(values) < 1):
                raise ValueError(f"grid '{name}' must be a non-empty list of positive integers")
        return self


def _require_panel_files(panel_dir: str) -> None:
    root = Path(panel_dir)
    for name in ("y.csv", "adjacency.txt"):
        if not (root / name).exists():
            raise ValueError(f"Required file not found: {root / name}")


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read a TOML or JSON configuration file into a plain dict."""
    path = Path(path)
    if not path.exists():
        raise CnarValidationError(f"Config file not found: {path}")
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        if path.suffix == ".json":
            with open(path) as f:
                data = json.load(f)
            if not isinstance(data, dict):
                raise CnarValidationError(f"Config file {path} must hold a JSON object")
            return data
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise CnarValidationError(f"Cannot parse config file {path}: {e}") from e
    raise CnarValidationError(f"Unsupported config format '{path.suffix}' (use .toml or .json)")


def resolve_config(
    model: type[C],
    config_path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
    base: dict[str, Any] | None = None,
) -> C:
    """Merge base defaults, file values and flag overrides, then validate.

    ``None`` override values are treated as "flag not given".
    """
    data: dict[str, Any] = dict(base or {})
    if config_path is not None:
        data.update(read_config_file(config_path))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise CnarValidationError(f"Invalid {model.__name__}: {e}") from e


def simulate_defaults(example: int | None) -> dict[str, Any]:
    """Default values for ``simulate`` taken from an example preset."""
    if example is None:
        return {}
    preset = get_preset(example)
    return {
        "example": preset.id,
        "generator": preset.generator,
        "dgp": preset.dgp,
        "n": preset.n,
        "k": preset.k,
        "t_len": preset.t_len,
        "alpha_n": preset.alpha_n,
        "rho": preset.rho,
        "beta1": preset.beta1,
        "beta2": preset.beta2,
        "gamma": list(preset.gamma),
        "m": preset.m,
        "sigma_e": preset.sigma_e,
    }
