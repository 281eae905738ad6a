"""Monte-Carlo benchmark over the five simulation examples.

Each replication draws a network and a panel of length T + 1, fits the first
and second CNAR steps and the (weighted) NAR baseline on the first T rows, and
scores coefficients, loadings and the one-step forecast of the held-out signal.
"""

import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from ..config.presets import ExamplePreset, get_preset
from ..exceptions import CnarValidationError
from .estim import fit_first_step, fit_nar, fit_second_step
from .evaluation import low_rank_remse, predict_nar, predict_one_step, remse
from .net import spectral_embed, subspace_distance
from .poet import fit_poet
from .rng import make_rng
from .scenario import ScenarioSpec, build_scenario

logger = logging.getLogger(__name__)

METRICS = ("remse_phi", "remse_beta2", "remse_gamma", "remse_lambda", "remse_pred")
METHODS = ("cnar1", "cnar2", "nar")


class BenchmarkGrid(BaseModel):
    n: list[int] = Field(min_length=1)
    t: list[int] = Field(min_length=1)
    k: list[int] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_values(self) -> "BenchmarkGrid":
        if min(self.t) < 2:
            raise ValueError("every T in the grid needs at least two time points")
        if min(self.k) < 1:
            raise ValueError("every K in the grid must be positive")
        if min(self.n) < max(self.k):
            raise ValueError(f"N={min(self.n)} cannot hold K={max(self.k)} communities")
        return self

    @classmethod
    def from_preset(cls, preset: ExamplePreset) -> "BenchmarkGrid":
        return cls(n=list(preset.grid_n), t=list(preset.grid_t), k=list(preset.grid_k))

    def cells(self) -> list[tuple[int, int, int]]:
        return [(n, t, k) for n in self.n for t in self.t for k in self.k]


class ReplicationRecord(BaseModel):
    example: int
    method: Literal["cnar1", "cnar2", "nar"]
    n: int
    t: int
    k: int
    replication: int
    seed: int
    remse_phi: float = Field(ge=0.0)
    remse_beta2: float = Field(ge=0.0)
    remse_gamma: float = Field(ge=0.0)
    remse_lambda: float = Field(ge=0.0)
    remse_pred: float = Field(ge=0.0)
    subspace_distance: float = Field(ge=0.0)


class McReport(BaseModel):
    """All replication records of one benchmark run, in (cell, replication, method) order."""

    example: int
    seed0: int
    reps: int
    grid: BenchmarkGrid
    records: list[ReplicationRecord]

    @model_validator(mode="after")
    def _check_count(self) -> "McReport":
        expected = len(self.grid.cells()) * self.reps * len(METHODS)
        if len(self.records) != expected:
            raise ValueError(f"report holds {len(self.records)} records, expected {expected}")
        return self

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.records])

    def summary(self) -> pd.DataFrame:
        """Mean, sd and median of every metric per (method, N, T, K) cell."""
        grouped = self.frame().groupby(["method", "n", "t", "k"], sort=True)[list(METRICS)]
        stats = grouped.agg(["mean", "std", "median"])
        # a single replication has no spread
        return stats.fillna(0.0)

    def summary_table(self) -> pd.DataFrame:
        """Cells formatted as 'mean(sd)' of the metric times 100."""
        stats = self.summary()
        table = pd.DataFrame(index=stats.index)
        for metric in METRICS:
            mean = stats[(metric, "mean")] * 100
            sd = stats[(metric, "std")] * 100
            table[metric] = [f"{m:.3f}({s:.3f})" for m, s in zip(mean, sd, strict=True)]
        return table.reset_index()

    def to_csv(self, path: str | Path | None = None) -> str:
        buffer = io.StringIO()
        self.frame().to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
        text = buffer.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def summary_json(self) -> str:
        stats = self.summary()
        cells = []
        for (method, n, t, k), row in stats.iterrows():
            cell: dict[str, Any] = {"method": method, "n": int(n), "t": int(t), "k": int(k)}
            for metric in METRICS:
                cell[metric] = {
                    "mean": float(row[(metric, "mean")]),
                    "sd": float(row[(metric, "std")]),
                    "median": float(row[(metric, "median")]),
                }
            cells.append(cell)
        payload = {
            "example": self.example,
            "seed0": self.seed0,
            "reps": self.reps,
            "grid": self.grid.model_dump(),
            "cells": cells,
        }
        return json.dumps(payload, indent=2)


@dataclass(frozen=True)
class ReplicationTask:
    example: int
    n: int
    t: int
    k: int
    replication: int
    seed0: int
    loadings_cache_dir: str | None


def _scenario_spec(preset: ExamplePreset, n: int, t_len: int, k: int) -> ScenarioSpec:
    return ScenarioSpec(
        generator=preset.generator,
        dgp=preset.dgp,
        n=n,
        k=k,
        t_len=t_len,
        alpha_n=preset.alpha_n,
        rho=preset.rho,
        beta1=preset.beta1,
        beta2=preset.beta2,
        gamma=tuple(preset.gamma),
        m=preset.m,
        sigma_e=preset.sigma_e,
    )


def run_replication(task: ReplicationTask) -> list[ReplicationRecord]:
    """Fit all three methods on one simulated data set; one record per method."""
    preset = get_preset(task.example)
    seed = task.seed0 + task.replication
    rng = make_rng(seed, task.n, task.t, task.k)
    # one extra row holds the forecast target
    scenario = build_scenario(
        _scenario_spec(preset, task.n, task.t + 1, task.k), rng, task.loadings_cache_dir
    )
    full = scenario.panel
    panel = full.window(0, task.t)
    assert full.signal is not None
    target = full.signal[task.t]
    y_last, z_last = full.y[task.t - 1], full.z[task.t - 1]

    truth = scenario.params
    loadings = scenario.loadings
    embedding = spectral_embed(scenario.adjacency, task.k)
    distance = subspace_distance(scenario.basis, embedding.u_hat)
    a_tilde = scenario.a_tilde

    first = fit_first_step(panel, embedding)
    errcov = fit_poet(first.residuals, preset.m)
    second = fit_second_step(panel, embedding, errcov)
    nar_first = fit_nar(panel, a_tilde)
    nar_cov = fit_poet(nar_first.residuals, preset.m)
    nar = fit_nar(panel, a_tilde, weighting=nar_cov)

    def lambda_error(l_hat: np.ndarray) -> float:
        return 0.0 if loadings is None else low_rank_remse(l_hat, loadings)

    u = embedding.u_hat
    cnar_target = scenario.phi_community
    rows: dict[str, dict[str, float]] = {}
    for method, fit in (("cnar1", first), ("cnar2", second)):
        rows[method] = {
            "remse_phi": remse(u @ fit.params.b1 @ u.T, cnar_target),
            "remse_beta2": remse([fit.params.beta2], [truth.beta2]),
            "remse_gamma": remse(fit.params.gamma, truth.gamma),
            "remse_lambda": lambda_error(errcov.lambda_hat),
            "remse_pred": remse(predict_one_step(fit, embedding, y_last, z_last), target),
        }
    rows["nar"] = {
        "remse_phi": remse(nar.beta1 * a_tilde, scenario.phi),
        "remse_beta2": remse([nar.beta2], [truth.beta2]),
        "remse_gamma": remse(nar.gamma, truth.gamma),
        "remse_lambda": lambda_error(nar_cov.lambda_hat),
        "remse_pred": remse(predict_nar(nar, a_tilde, y_last, z_last), target),
    }
    return [
        ReplicationRecord(
            example=task.example,
            method=method,  # type: ignore[arg-type]
            n=task.n,
            t=task.t,
            k=task.k,
            replication=task.replication,
            seed=seed,
            subspace_distance=distance,
            **rows[method],
        )
        for method in METHODS
    ]


def run_benchmark(
    example_id: int,
    grid: BenchmarkGrid | None = None,
    reps: int = 20,
    seed0: int = 2024,
    workers: int = 1,
    loadings_cache_dir: str | Path | None = None,
) -> McReport:
    """Replicate one example over a (N, T, K) grid.

    Replication r of every cell draws from the stream keyed by seed0 + r and the
    cell, so the report does not depend on ``workers``.
    """
    preset = get_preset(example_id)
    if reps < 1:
        raise CnarValidationError(f"reps must be positive, got {reps}")
    if workers < 1:
        raise CnarValidationError(f"workers must be positive, got {workers}")
    grid = grid or BenchmarkGrid.from_preset(preset)
    if min(grid.t) - 1 <= preset.m or min(grid.n) <= preset.m:
        raise CnarValidationError(
            f"grid too small for M={preset.m} factors: need T - 1 > M and N > M"
        )
    cache = str(loadings_cache_dir) if loadings_cache_dir is not None else None
    tasks = [
        ReplicationTask(preset.id, n, t, k, r, seed0, cache)
        for n, t, k in grid.cells()
        for r in range(reps)
    ]
    logger.info(
        "Benchmark example %d: %d cells x %d reps on %d worker(s)",
        preset.id, len(grid.cells()), reps, workers,
    )

    results: list[list[ReplicationRecord]] = [[] for _ in tasks]
    if workers == 1:
        for pos, task in enumerate(tasks):
            results[pos] = run_replication(task)
            logger.debug("replication %d/%d done", pos + 1, len(tasks))
    else:
        with ProcessPoolExecutor(workers) as executor:
            future2pos = {
                executor.submit(run_replication, task): pos for pos, task in enumerate(tasks)
            }
            for future in as_completed(future2pos):
                results[future2pos[future]] = future.result()

    records = [record for batch in results for record in batch]
    return McReport(example=preset.id, seed0=seed0, reps=reps, grid=grid, records=records)
