import os

import typer
from rich.table import Table

from py_cnar.cli.utils import get_console
from py_cnar.config import CnarSettings, get_settings
from py_cnar.constants import APP_DISPLAY_NAME

app = typer.Typer()
console = get_console()


def settings_rows(settings: CnarSettings) -> list[tuple[str, str]]:
    cache = settings.loadings_cache_dir
    return [
        ("Output Directory", os.path.abspath(settings.output_dir)),
        ("Workers", str(settings.workers)),
        ("Log Level", settings.log_level),
        ("Default Seed", str(settings.default_seed)),
        ("Loadings Cache", os.path.abspath(cache) if cache else "[italic]Disabled[/italic]"),
    ]


@app.command("show")
def show_config() -> None:
    """Show the settings every command starts from (CNAR_* environment, .env)."""
    table = Table(
        title=f"{APP_DISPLAY_NAME} Configuration",
        show_header=True,
        header_style="bold magenta",
    )
    table.add_column("Setting", style="dim")
    table.add_column("Value")
    for name, value in settings_rows(get_settings()):
        table.add_row(name, value)

    console.print(table)


@app.callback()
def main() -> None:
    """Manage configuration."""
