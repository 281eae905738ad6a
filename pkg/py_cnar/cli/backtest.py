from pathlib import Path
from typing import Any

import typer
from rich.table import Table

from py_cnar.cli.fit import expected_covariates
from py_cnar.cli.utils import file_values, get_console, handle_errors, run_defaults, setup_logging
from py_cnar.config import BacktestConfig, resolve_config
from py_cnar.core.evaluation import (
    BacktestMethod,
    RollingConfig,
    WindowScore,
    backtest_frame,
    rolling_backtest,
)
from py_cnar.core.net import spectral_embed
from py_cnar.exceptions import CnarValidationError
from py_cnar.storage import RunStorage, atomic_write_text

console = get_console()


def backtest(
    panel_dir: str | None = typer.Argument(None, help="Directory with y.csv and adjacency.txt"),
    config: Path | None = typer.Option(None, "--config", help="TOML or JSON run configuration"),
    k: int | None = typer.Option(None, "--k", help="Number of communities"),
    factors: int | None = typer.Option(None, "--factors", help="Number of noise factors M"),
    t_train: int | None = typer.Option(None, "--t-train", help="Training window length"),
    t_test: int | None = typer.Option(None, "--t-test", help="Test window length"),
    stride: int | None = typer.Option(None, "--stride", help="Step between windows"),
    method: str | None = typer.Option(None, "--method", help="cnar1, cnar2, nar or all"),
    p: int | None = typer.Option(None, "--p", help="Expected number of covariates"),
    seed: int | None = typer.Option(None, "--seed", help="Recorded for reproducibility"),
    out: str | None = typer.Option(None, "--out", help="Output directory (default: panel dir)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Rolling-window out-of-sample comparison; writes report.csv."""
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
            "factors": factors,
            "t_train": t_train,
            "t_test": t_test,
            "stride": stride,
            "method": method,
            "p": p,
            "seed": seed,
            "out": out,
        }
        cfg = resolve_config(BacktestConfig, config, overrides, base)
        rolling = RollingConfig(t_train=cfg.t_train, t_test=cfg.t_test, stride=cfg.stride)

        storage = RunStorage(cfg.panel_dir)
        adjacency = storage.load_adjacency()
        panel = storage.load_panel(expected_p=expected_covariates(storage, cfg.p))
        if adjacency.n != panel.n:
            raise CnarValidationError(
                f"adjacency has {adjacency.n} nodes but y.csv has {panel.n} columns"
            )
        if rolling.window_count(panel.t_len) == 0:
            raise CnarValidationError(
                f"panel length T={panel.t_len} is shorter than t_train + t_test = "
                f"{cfg.t_train + cfg.t_test}"
            )
        embedding = spectral_embed(adjacency, cfg.k)

        methods = list(BacktestMethod) if cfg.method == "all" else [BacktestMethod(cfg.method)]
        scores: dict[BacktestMethod, list[WindowScore]] = {
            m: rolling_backtest(panel, embedding, rolling, m, cfg.factors, a_tilde=adjacency)
            for m in methods
        }
        frame = backtest_frame(scores)
        report = Path(cfg.out) / "report.csv"
        atomic_write_text(
            report, frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
        )

    table = Table(title="Rolling backtest", show_header=True, header_style="bold magenta")
    table.add_column("Method", style="dim")
    table.add_column("Windows", justify="right")
    table.add_column("Mean ReMSPE", justify="right")
    for m, rows in scores.items():
        ratios = [s.remspe for s in rows if s.remspe is not None]
        mean = f"{sum(ratios) / len(ratios):.4f}" if ratios else "n/a"
        table.add_row(m.value.upper(), str(len(rows)), mean)
    console.print(table)
    console.print(f"[green]Wrote {report.resolve()}[/green]")
