from pathlib import Path
from typing import Any

import typer
from rich.table import Table

from py_cnar.cli.utils import get_console, handle_errors, run_defaults, setup_logging
from py_cnar.config import BenchmarkConfig, get_preset, get_settings, list_presets, resolve_config
from py_cnar.core.benchmark import METRICS, BenchmarkGrid, McReport, run_benchmark
from py_cnar.storage import atomic_write_text

console = get_console()


def presets_table() -> Table:
    table = Table(title="Simulation examples", show_header=True, header_style="bold magenta")
    table.add_column("ID", style="dim")
    table.add_column("Title")
    table.add_column("Generator")
    table.add_column("Model")
    for preset in list_presets():
        table.add_row(str(preset.id), preset.title, preset.generator, preset.dgp.upper())
    return table


def summary_table(report: McReport) -> Table:
    """Rows per (method, N, T, K); cells are mean(sd) x 100."""
    summary = report.summary_table()
    table = Table(
        title=f"Example {report.example}: ReMSE x 100, mean(sd) over {report.reps} reps",
        show_header=True,
        header_style="bold magenta",
    )
    for column in ("method", "n", "t", "k", *METRICS):
        table.add_column(column, justify="left" if column == "method" else "right")
    for _, row in summary.iterrows():
        cells = [str(row[c]) for c in ("n", "t", "k", *METRICS)]
        table.add_row(str(row["method"]).upper(), *cells)
    return table


def benchmark(
    config: Path | None = typer.Option(None, "--config", help="TOML or JSON run configuration"),
    example: int | None = typer.Option(None, "--example", help="Example preset 1-5"),
    list_examples: bool = typer.Option(False, "--list", help="List the example presets"),
    n: list[int] | None = typer.Option(None, "--n", help="Grid of node counts (repeatable)"),
    t: list[int] | None = typer.Option(None, "--t", help="Grid of series lengths (repeatable)"),
    k: list[int] | None = typer.Option(None, "--k", help="Grid of community counts (repeatable)"),
    reps: int | None = typer.Option(None, "--reps", help="Replications per grid cell"),
    workers: int | None = typer.Option(None, "--workers", help="Worker processes"),
    seed: int | None = typer.Option(None, "--seed", help="Seed of replication 0"),
    out: str | None = typer.Option(None, "--out", help="Output directory"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Monte-Carlo benchmark of CNAR step 1, step 2 and NAR on one example."""
    if list_examples:
        console.print(presets_table())
        return

    setup_logging(verbose)
    with handle_errors():
        base: dict[str, Any] = {**run_defaults(), "workers": get_settings().workers}
        overrides = {
            "example": example,
            "n": list(n) if n else None,
            "t": list(t) if t else None,
            "k": list(k) if k else None,
            "reps": reps,
            "workers": workers,
            "seed": seed,
            "out": out,
        }
        cfg = resolve_config(BenchmarkConfig, config, overrides, base)
        preset = get_preset(cfg.example)
        grid = BenchmarkGrid(
            n=cfg.n or list(preset.grid_n),
            t=cfg.t or list(preset.grid_t),
            k=cfg.k or list(preset.grid_k),
        )
        report = run_benchmark(
            cfg.example,
            grid,
            reps=cfg.reps,
            seed0=cfg.seed,
            workers=cfg.workers or 1,
            loadings_cache_dir=get_settings().loadings_cache_dir,
        )
        out_dir = Path(cfg.out)
        atomic_write_text(out_dir / "mc_report.csv", report.to_csv())
        atomic_write_text(out_dir / "summary.json", report.summary_json() + "\n")

    console.print(summary_table(report))
    console.print(f"[green]Wrote mc_report.csv and summary.json to {out_dir.resolve()}[/green]")
