from pathlib import Path
from typing import Any

import typer
from rich.table import Table

from py_cnar.cli.fit import expected_covariates
from py_cnar.cli.utils import file_values, get_console, handle_errors, run_defaults, setup_logging
from py_cnar.config import DiagnoseConfig, resolve_config
from py_cnar.core.estim import fit_first_step
from py_cnar.core.net import ScreeResult, scree, spectral_embed
from py_cnar.core.poet import FactorSelection, select_num_factors
from py_cnar.exceptions import CnarValidationError
from py_cnar.storage import RunStorage

console = get_console()


def _ratio_table(title: str, label: str, values: Any, ratios: Any, chosen: int) -> Table:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column(label, justify="right")
    table.add_column("Eigenvalue", justify="right")
    table.add_column("Ratio to next", justify="right")
    for i, ratio in enumerate(ratios):
        marker = " *" if i + 1 == chosen else ""
        table.add_row(str(i + 1), f"{values[i]:.6g}", f"{ratio:.4f}{marker}")
    return table


def diagnostics_record(network: ScreeResult, factors: FactorSelection, k: int) -> dict[str, Any]:
    return {
        "scree": {
            "abs_eigvals": network.abs_eigvals[: network.ratios.size + 1].tolist(),
            "ratios": network.ratios.tolist(),
            "suggested_k": network.suggested_k,
        },
        "factors": {
            "fit_k": k,
            "eigvals": factors.eigvals.tolist(),
            "ratios": factors.ratios.tolist(),
            "suggested_m": factors.suggested_m,
        },
    }


def diagnose(
    panel_dir: str | None = typer.Argument(None, help="Directory with y.csv and adjacency.txt"),
    config: Path | None = typer.Option(None, "--config", help="TOML or JSON run configuration"),
    k: int | None = typer.Option(None, "--k", help="Communities for the residual fit"),
    k_max: int | None = typer.Option(None, "--k-max", help="Largest K on the scree"),
    m_max: int | None = typer.Option(None, "--m-max", help="Largest M for the factor ratio"),
    p: int | None = typer.Option(None, "--p", help="Expected number of covariates"),
    out: str | None = typer.Option(None, "--out", help="Output directory (default: panel dir)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Suggest K from the adjacency scree and M from first-step residuals; writes diagnose.json.

    Both suggestions are advisory: every other command still takes K and M as inputs.
    """
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
            "k_max": k_max,
            "m_max": m_max,
            "p": p,
            "out": out,
        }
        cfg = resolve_config(DiagnoseConfig, config, overrides, base)

        storage = RunStorage(cfg.panel_dir)
        adjacency = storage.load_adjacency()
        panel = storage.load_panel(expected_p=expected_covariates(storage, cfg.p))
        if adjacency.n != panel.n:
            raise CnarValidationError(
                f"adjacency has {adjacency.n} nodes but y.csv has {panel.n} columns"
            )
        network = scree(adjacency, cfg.k_max)
        first = fit_first_step(panel, spectral_embed(adjacency, cfg.k))
        factors = select_num_factors(first.residuals, cfg.m_max)

        target = RunStorage(cfg.out, create=True)
        target.save_json("diagnose.json", diagnostics_record(network, factors, cfg.k))

    console.print(
        _ratio_table(
            "Adjacency scree", "k", network.abs_eigvals, network.ratios, network.suggested_k
        )
    )
    console.print(
        _ratio_table(
            "Residual factor eigenvalues", "m", factors.eigvals, factors.ratios, factors.suggested_m
        )
    )
    console.print(
        f"Suggested K = {network.suggested_k}, suggested M = {factors.suggested_m} (advisory)"
    )
    console.print(f"[green]Wrote {(Path(cfg.out) / 'diagnose.json').resolve()}[/green]")
