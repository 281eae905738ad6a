"""py-cnar: community network autoregression for large networked panels.

This package provides:
- Block-model network generators and spectral embeddings
- CNAR / NAR simulation with factor-structured noise
- Two-step (least squares, then factor-weighted least squares) estimation
- Rolling-window backtests and Monte-Carlo benchmarks
"""

__version__ = "0.1.0"

from .config import CnarSettings
from .constants import APP_DISPLAY_NAME, APP_NAME
from .core import (
    PanelSeries,
    TwoStepEstimator,
    fit_first_step,
    fit_second_step,
    run_benchmark,
    spectral_embed,
)
from .generators import GeneratorRegistry, create_generator

__all__ = [
    "APP_NAME",
    "APP_DISPLAY_NAME",
    "CnarSettings",
    "PanelSeries",
    "TwoStepEstimator",
    "fit_first_step",
    "fit_second_step",
    "run_benchmark",
    "spectral_embed",
    "GeneratorRegistry",
    "create_generator",
    "__version__",
]
