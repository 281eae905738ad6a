from pathlib import Path
from typing import Any, Literal

import typer
from pydantic import BaseModel
from rich.table import Table

from py_cnar.cli.utils import file_values, get_console, handle_errors, run_defaults, setup_logging
from py_cnar.config import SimulateConfig, get_settings, resolve_config
from py_cnar.config.runs import simulate_defaults
from py_cnar.core.estim import THETA_LAYOUT
from py_cnar.core.model import pack_theta
from py_cnar.core.rng import make_rng
from py_cnar.core.scenario import Scenario, ScenarioSpec, build_scenario
from py_cnar.storage import RunStorage

console = get_console()


class TruthRecord(BaseModel):
    """Generating parameters written next to a simulated panel."""

    schema_version: Literal[1] = 1
    dgp: str
    generator: str
    example: int | None
    seed: int
    n: int
    k: int
    p: int
    t_len: int
    basis: str
    theta_layout: str = THETA_LAYOUT
    theta: list[float]
    b1: list[list[float]]
    beta2: float
    gamma: list[float]
    beta1: float | None = None
    m: int
    sigma_e: float | None
    noiseless: bool
    loadings: list[list[float]] | None = None


def scenario_spec(cfg: SimulateConfig) -> ScenarioSpec:
    return ScenarioSpec(
        generator=cfg.generator,
        dgp=cfg.dgp,
        n=cfg.n,
        k=cfg.k,
        t_len=cfg.t_len,
        burn_in=cfg.burn_in,
        alpha_n=cfg.alpha_n,
        rho=cfg.rho,
        b1_diag=tuple(cfg.b1_diag) if cfg.b1_diag is not None else None,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        gamma=tuple(cfg.gamma),
        m=cfg.m,
        sigma_e=cfg.sigma_e,
        noiseless=cfg.noiseless,
        basis=cfg.basis,
    )


def truth_record(cfg: SimulateConfig, scenario: Scenario) -> TruthRecord:
    params = scenario.params
    loadings = scenario.loadings
    return TruthRecord(
        dgp=cfg.dgp,
        generator=cfg.generator,
        example=cfg.example,
        seed=cfg.seed,
        n=cfg.n,
        k=cfg.k,
        p=params.p,
        t_len=cfg.t_len,
        basis="membership" if cfg.dgp == "nar" else cfg.basis,
        theta=pack_theta(params).tolist(),
        b1=params.b1.tolist(),
        beta2=params.beta2,
        gamma=params.gamma.tolist(),
        beta1=cfg.beta1 if cfg.dgp == "nar" else None,
        m=cfg.m,
        sigma_e=None if cfg.noiseless else cfg.sigma_e,
        noiseless=cfg.noiseless,
        loadings=loadings.tolist() if loadings is not None and loadings.size else None,
    )


def simulate(
    config: Path | None = typer.Option(None, "--config", help="TOML or JSON run configuration"),
    example: int | None = typer.Option(None, "--example", help="Start from example preset 1-5"),
    seed: int | None = typer.Option(None, "--seed", help="Random seed"),
    out: str | None = typer.Option(None, "--out", help="Output directory"),
    n: int | None = typer.Option(None, "--n", help="Number of nodes"),
    k: int | None = typer.Option(None, "--k", help="Number of communities"),
    t_len: int | None = typer.Option(None, "--t", help="Number of time points kept"),
    factors: int | None = typer.Option(None, "--factors", help="Number of noise factors M"),
    dgp: str | None = typer.Option(None, "--dgp", help="Generating model: cnar or nar"),
    generator: str | None = typer.Option(None, "--generator", help="Network generator name"),
    basis: str | None = typer.Option(None, "--basis", help="True basis: membership or embedding"),
    noiseless: bool | None = typer.Option(
        None, "--noiseless/--noisy", help="Inject exactly zero noise"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Simulate a network and a CNAR/NAR panel into a run directory."""
    setup_logging(verbose)
    with handle_errors():
        values = file_values(config)
        chosen = example if example is not None else values.get("example")
        base: dict[str, Any] = {**run_defaults(), **simulate_defaults(chosen)}
        overrides = {
            "example": example,
            "seed": seed,
            "out": out,
            "n": n,
            "k": k,
            "t_len": t_len,
            "m": factors,
            "dgp": dgp,
            "generator": generator,
            "basis": basis,
            "noiseless": noiseless,
        }
        cfg = resolve_config(SimulateConfig, config, overrides, base)

        scenario = build_scenario(
            scenario_spec(cfg), make_rng(cfg.seed), get_settings().loadings_cache_dir
        )
        record = truth_record(cfg, scenario)

        storage = RunStorage(cfg.out, create=True)
        storage.save_adjacency(scenario.adjacency)
        storage.save_membership(scenario.membership.labels)
        storage.save_panel(scenario.panel)
        storage.save_json("truth.json", record)

    table = Table(title="Simulated panel", show_header=True, header_style="bold magenta")
    table.add_column("Field", style="dim")
    table.add_column("Value")
    table.add_row("Model", f"{cfg.dgp.upper()} on {cfg.generator}")
    table.add_row("N x T", f"{cfg.n} x {cfg.t_len}")
    table.add_row("K / p / M", f"{cfg.k} / {record.p} / {cfg.m}")
    table.add_row("Seed", str(cfg.seed))
    console.print(table)
    console.print(f"[green]Wrote simulation to {Path(cfg.out).resolve()}[/green]")
