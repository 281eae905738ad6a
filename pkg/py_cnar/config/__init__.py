from .presets import ExamplePreset, get_preset, list_presets
from .runs import (
    BacktestConfig,
    BenchmarkConfig,
    DiagnoseConfig,
    FitConfig,
    RunConfig,
    SimulateConfig,
    resolve_config,
)
from .settings import CnarSettings, get_settings

__all__ = [
    "CnarSettings",
    "get_settings",
    "ExamplePreset",
    "get_preset",
    "list_presets",
    "RunConfig",
    "SimulateConfig",
    "FitConfig",
    "BacktestConfig",
    "BenchmarkConfig",
    "DiagnoseConfig",
    "resolve_config",
]
