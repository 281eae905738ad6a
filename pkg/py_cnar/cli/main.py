import typer

from py_cnar import __version__
from py_cnar.cli.backtest import backtest
from py_cnar.cli.benchmark import benchmark
from py_cnar.cli.config import app as config_app
from py_cnar.cli.diagnose import diagnose
from py_cnar.cli.fit import fit
from py_cnar.cli.simulate import simulate
from py_cnar.cli.utils import get_console
from py_cnar.constants import APP_DISPLAY_NAME, CLI_NAME

app = typer.Typer(
    name=CLI_NAME,
    help=f"{APP_DISPLAY_NAME}: simulate, fit, backtest, benchmark and diagnose.",
    add_completion=False,
)

app.add_typer(config_app, name="config", help="View configuration")
app.command(name="simulate", help="Simulate a network and a panel")(simulate)
app.command(name="fit", help="Fit the CNAR model to a panel")(fit)
app.command(name="backtest", help="Rolling-window forecast comparison")(backtest)
app.command(name="benchmark", help="Monte-Carlo benchmark of an example")(benchmark)
app.command(name="diagnose", help="Suggest K and M from eigenvalue ratios")(diagnose)


@app.command("version")
def version() -> None:
    """Print the installed version."""
    get_console().print(f"{CLI_NAME} {__version__}")


def main() -> None:
    app()


if __name__ == "__main__":
    main()
