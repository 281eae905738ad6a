from pathlib import Path
from typing import Any

import typer
from rich.table import Table

from py_cnar.cli.utils import file_values, get_console, handle_errors, run_defaults, setup_logging
from py_cnar.config import FitConfig, resolve_config
from py_cnar.core.estim import (
    FitResult,
    TwoStepEstimator,
    errcov_to_json,
    fit_first_step,
    fit_to_json,
)
from py_cnar.core.net import spectral_embed
from py_cnar.exceptions import CnarValidationError
from py_cnar.storage import RunStorage

console = get_console()


def expected_covariates(storage: RunStorage, p: int | None) -> int | None:
    """Explicit --p wins; otherwise trust the truth record of a simulated panel."""
    if p is not None or not storage.exists("truth.json"):
        return p
    value = storage.load_json("truth.json").get("p")
    return int(value) if value is not None else None


def coefficient_table(fit: FitResult) -> Table:
    table = Table(
        title=f"CNAR {fit.step.value}-step estimate", show_header=True, header_style="bold magenta"
    )
    table.add_column("Coefficient", style="dim")
    table.add_column("Estimate", justify="right")
    b1 = fit.params.b1
    for j in range(fit.k):
        for i in range(fit.k):
            table.add_row(f"B1[{i},{j}]", f"{b1[i, j]:.6f}")
    table.add_row("beta2", f"{fit.params.beta2:.6f}")
    for i, g in enumerate(fit.params.gamma):
        table.add_row(f"gamma[{i}]", f"{g:.6f}")
    return table


def fit(
    panel_dir: str | None = typer.Argument(None, help="Directory with y.csv and adjacency.txt"),
    config: Path | None = typer.Option(None, "--config", help="TOML or JSON run configuration"),
    k: int | None = typer.Option(None, "--k", help="Number of communities"),
    step: int | None = typer.Option(None, "--step", help="1 = least squares, 2 = two-step"),
    factors: int | None = typer.Option(None, "--factors", help="Number of noise factors M"),
    p: int | None = typer.Option(None, "--p", help="Expected number of covariates"),
    seed: int | None = typer.Option(None, "--seed", help="Recorded in the provenance"),
    out: str | None = typer.Option(None, "--out", help="Output directory (default: panel dir)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Fit the CNAR model to a stored panel and write fit.json (and errcov.json)."""
    setup_logging(verbose)
    with handle_errors():
        values = file_values(config)
        base: dict[str, Any] = run_defaults()
        source = panel_dir if panel_dir is not None else values.get("panel_dir")
        if source is not None:
            base["out"] = source
        overrides = {
            "panel_dir": panel_dir,
            "k": k,
            "step": step,
            "factors": factors,
            "p": p,
            "seed": seed,
            "out": out,
        }
        cfg = resolve_config(FitConfig, config, overrides, base)

        storage = RunStorage(cfg.panel_dir)
        adjacency = storage.load_adjacency()
        panel = storage.load_panel(expected_p=expected_covariates(storage, cfg.p))
        if adjacency.n != panel.n:
            raise CnarValidationError(
                f"adjacency has {adjacency.n} nodes but y.csv has {panel.n} columns"
            )
        embedding = spectral_embed(adjacency, cfg.k)

        provenance = {"command": "fit", "config": cfg.model_dump(mode="json")}
        errcov_text = None
        if cfg.step == 1:
            result = fit_first_step(panel, embedding)
        else:
            two_step = TwoStepEstimator(cfg.k, cfg.factors).fit(panel, embedding)
            result = two_step.second
            errcov_text = errcov_to_json(two_step.errcov)

        target = RunStorage(cfg.out, create=True)
        target.save_json("fit.json", fit_to_json(result, provenance))
        if errcov_text is not None:
            target.save_json("errcov.json", errcov_text)

    console.print(coefficient_table(result))
    console.print(f"[green]Wrote fit to {Path(cfg.out).resolve()}[/green]")

