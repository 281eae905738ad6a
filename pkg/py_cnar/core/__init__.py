from .benchmark import BenchmarkGrid, McReport, ReplicationRecord, run_benchmark
from .estim import (
    FitResult,
    FitStep,
    NarFit,
    TwoStepEstimator,
    TwoStepFit,
    errcov_to_json,
    fit_first_step,
    fit_from_json,
    fit_nar,
    fit_second_step,
    fit_to_json,
)
from .evaluation import (
    BacktestMethod,
    RollingConfig,
    WindowScore,
    backtest_frame,
    predict_nar,
    predict_one_step,
    remse,
    rolling_backtest,
)
from .model import (
    CnarParams,
    FactorNoiseSpec,
    PanelSeries,
    build_design,
    check_stationarity,
    pack_theta,
    simulate_cnar,
    simulate_nar,
    unpack_theta,
)
from .net import (
    AdjacencyMatrix,
    SbmSpec,
    SpectralEmbedding,
    generate_sbm,
    membership_basis,
    planted_partition_spec,
    row_normalize,
    scree,
    spectral_embed,
    subspace_distance,
)
from .poet import ErrCov, PrecisionOperator, fit_poet, precision_smw, select_num_factors
from .scenario import Scenario, ScenarioSpec, build_scenario

__all__ = [
    "AdjacencyMatrix",
    "SbmSpec",
    "SpectralEmbedding",
    "generate_sbm",
    "planted_partition_spec",
    "spectral_embed",
    "subspace_distance",
    "row_normalize",
    "scree",
    "membership_basis",
    "CnarParams",
    "FactorNoiseSpec",
    "PanelSeries",
    "pack_theta",
    "unpack_theta",
    "check_stationarity",
    "build_design",
    "simulate_cnar",
    "simulate_nar",
    "ErrCov",
    "PrecisionOperator",
    "fit_poet",
    "precision_smw",
    "select_num_factors",
    "FitResult",
    "FitStep",
    "NarFit",
    "fit_first_step",
    "fit_second_step",
    "fit_nar",
    "TwoStepEstimator",
    "TwoStepFit",
    "fit_to_json",
    "fit_from_json",
    "errcov_to_json",
    "BacktestMethod",
    "RollingConfig",
    "WindowScore",
    "predict_one_step",
    "predict_nar",
    "remse",
    "rolling_backtest",
    "backtest_frame",
    "Scenario",
    "ScenarioSpec",
    "build_scenario",
    "BenchmarkGrid",
    "McReport",
    "ReplicationRecord",
    "run_benchmark",
]
