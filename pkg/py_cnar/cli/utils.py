import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from py_cnar.config import get_settings
from py_cnar.config.runs import read_config_file
from py_cnar.exceptions import CnarError, CnarValidationError

console = Console()


def get_console() -> Console:
    return console


def setup_logging(verbose: bool = False) -> None:
    """Route log records through rich at the configured level (DEBUG with --verbose)."""
    level = logging.DEBUG if verbose else getattr(logging, get_settings().log_level)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@contextmanager
def handle_errors() -> Iterator[None]:
    """Exit 2 on invalid input, 1 on any other failure."""
    try:
        yield
    except (CnarValidationError, ValidationError) as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(code=2) from e
    except (CnarError, OSError) as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(code=1) from e


def file_values(config_path: Path | None) -> dict[str, Any]:
    return read_config_file(config_path) if config_path is not None else {}


def run_defaults() -> dict[str, Any]:
    """Seed and output directory defaults taken from the environment settings."""
    settings = get_settings()
    return {"seed": settings.default_seed, "out": settings.output_dir}
