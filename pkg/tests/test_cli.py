"""CLI tests: simulate, fit, backtest and benchmark against temporary run directories."""

import csv
import json
from pathlib import Path

import numpy as np
from typer.testing import CliRunner

from py_cnar import __version__
from py_cnar.cli.main import app

runner = CliRunner()


def _flat(output: str) -> str:
    """Console output with rich line wrapping undone."""
    return output.replace("\n", "")


def _simulate(out: Path, *extra: str) -> None:
    result = runner.invoke(app, ["simulate", "--example", "1", "--out", str(out), *extra])
    assert result.exit_code == 0, result.stdout


def test_version() -> None:
    result = runner.invoke(app, ["version"])

    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_help_lists_commands() -> None:
    result = runner.invoke(app, ["--help"])

    assert result.exit_code == 0
    for command in ("simulate", "fit", "backtest", "benchmark", "diagnose", "config"):
        assert command in result.stdout


def test_simulate_writes_run_directory(tmp_path: Path) -> None:
    out = tmp_path / "sim"

    _simulate(out, "--n", "40", "--t", "30", "--seed", "5")

    for name in ("adjacency.txt", "membership.txt", "y.csv", "z.csv", "signal.csv", "truth.json"):
        assert (out / name).exists(), name
    truth = json.loads((out / "truth.json").read_text())
    assert truth["example"] == 1
    assert truth["n"] == 40
    assert truth["t_len"] == 30
    assert truth["p"] == 5
    assert len(truth["theta"]) == 2 * 2 + 1 + 5
    assert np.loadtxt(out / "y.csv", delimiter=",").shape == (30, 40)


def test_simulate_is_reproducible(tmp_path: Path) -> None:
    """Test that the same seed writes byte-identical files."""
    for name in ("a", "b"):
        _simulate(tmp_path / name, "--n", "30", "--t", "20", "--seed", "8")

    for file in ("adjacency.txt", "y.csv", "z.csv"):
        assert (tmp_path / "a" / file).read_bytes() == (tmp_path / "b" / file).read_bytes()


def test_simulate_rejects_single_time_point(tmp_path: Path) -> None:
    result = runner.invoke(app, ["simulate", "--t", "1", "--out", str(tmp_path / "x")])

    assert result.exit_code == 2
    assert "Error" in result.stdout
    assert not (tmp_path / "x").exists()


def test_simulate_rejects_unknown_generator(tmp_path: Path) -> None:
    result = runner.invoke(
        app, ["simulate", "--generator", "lattice", "--out", str(tmp_path / "x")]
    )

    assert result.exit_code == 2


def test_simulate_from_config_file(tmp_path: Path) -> None:
    config = tmp_path / "sim.toml"
    out = tmp_path / "from-config"
    config.write_text(f'example = 5\nn = 30\nt_len = 20\nm = 0\nout = "{out.as_posix()}"\n')

    result = runner.invoke(app, ["simulate", "--config", str(config), "--seed", "3"])

    assert result.exit_code == 0, result.stdout
    truth = json.loads((out / "truth.json").read_text())
    assert truth["generator"] == "random_partition"
    assert truth["seed"] == 3
    assert truth["m"] == 0


def test_fit_recovers_noiseless_truth(tmp_path: Path) -> None:
    """Test exact first-step recovery through the files written by simulate."""
    out = tmp_path / "clean"
    _simulate(out, "--n", "40", "--t", "60", "--noiseless", "--basis", "embedding")

    result = runner.invoke(app, ["fit", str(out), "--step", "1", "--k", "2"])

    assert result.exit_code == 0, result.stdout
    fit = json.loads((out / "fit.json").read_text())
    truth = json.loads((out / "truth.json").read_text())
    assert fit["step"] == "first"
    assert fit["theta_layout"] == truth["theta_layout"]
    np.testing.assert_allclose(fit["theta"], truth["theta"], rtol=0, atol=1e-8)


def test_fit_second_step_writes_error_covariance(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "40", "--t", "50")
    target = tmp_path / "fit"

    result = runner.invoke(
        app, ["fit", str(run), "--step", "2", "--factors", "2", "--out", str(target)]
    )

    assert result.exit_code == 0, result.stdout
    assert json.loads((target / "fit.json").read_text())["step"] == "second"
    errcov = json.loads((target / "errcov.json").read_text())
    assert errcov["m"] == 2
    assert errcov["n"] == 40
    assert "beta2" in result.stdout


def test_fit_missing_covariates_file(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "30", "--t", "20")
    (run / "z.csv").unlink()

    result = runner.invoke(app, ["fit", str(run)])

    assert result.exit_code == 2
    assert "z.csv" in _flat(result.stdout)
    assert not (run / "fit.json").exists()


def test_fit_missing_panel_directory(tmp_path: Path) -> None:
    result = runner.invoke(app, ["fit", str(tmp_path / "nowhere")])

    assert result.exit_code == 2
    assert "y.csv" in _flat(result.stdout)


def test_backtest_writes_report(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "30", "--t", "200")

    result = runner.invoke(app, ["backtest", str(run), "--method", "all"])

    assert result.exit_code == 0, result.stdout
    with open(run / "report.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert [int(r["test_start"]) for r in rows] == [150, 175]
    for method in ("cnar1", "cnar2", "nar"):
        assert all(float(r[f"remspe_{method}"]) > 0 for r in rows)


def test_backtest_single_method_with_stride(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "30", "--t", "120")

    result = runner.invoke(
        app,
        ["backtest", str(run), "--method", "cnar1", "--t-train", "80", "--t-test", "10",
         "--stride", "15"],
    )

    assert result.exit_code == 0, result.stdout
    header = (run / "report.csv").read_text().splitlines()[0].split(",")
    assert "remspe_cnar1" in header
    assert "remspe_nar" not in header
    assert len((run / "report.csv").read_text().splitlines()) == 1 + 3


def test_backtest_defaults_on_244_points_use_three_windows(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "30", "--t", "244")

    result = runner.invoke(app, ["backtest", str(run), "--method", "cnar2"])

    assert result.exit_code == 0, result.stdout
    with open(run / "report.csv") as f:
        rows = list(csv.DictReader(f))
    assert [int(r["test_start"]) for r in rows] == [150, 175, 200]
    assert [int(r["test_stop"]) for r in rows] == [175, 200, 225]


def test_backtest_rejects_short_panel(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "30", "--t", "100")

    result = runner.invoke(app, ["backtest", str(run)])

    assert result.exit_code == 2
    assert "shorter" in _flat(result.stdout)
    assert not (run / "report.csv").exists()


def test_diagnose_suggests_block_and_factor_counts(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "60", "--t", "80")

    result = runner.invoke(app, ["diagnose", str(run)])

    assert result.exit_code == 0, result.stdout
    record = json.loads((run / "diagnose.json").read_text())
    assert record["scree"]["suggested_k"] == 2
    assert len(record["scree"]["ratios"]) == 8
    assert record["factors"]["suggested_m"] == 3
    assert len(record["factors"]["eigvals"]) == 9
    assert "Suggested K = 2, suggested M = 3" in _flat(result.stdout)


def test_diagnose_rejects_k_max_beyond_network(tmp_path: Path) -> None:
    run = tmp_path / "run"
    _simulate(run, "--n", "30", "--t", "40")

    result = runner.invoke(app, ["diagnose", str(run), "--k-max", "30"])

    assert result.exit_code == 2
    assert "k_max" in _flat(result.stdout)
    assert not (run / "diagnose.json").exists()


def test_benchmark_list() -> None:
    result = runner.invoke(app, ["benchmark", "--list"])

    assert result.exit_code == 0
    for generator in ("sbm", "spectral_forge", "powerlaw_cluster", "random_partition"):
        assert generator in result.stdout


def test_benchmark_small_grid(tmp_path: Path) -> None:
    out = tmp_path / "mc"

    result = runner.invoke(
        app,
        ["benchmark", "--example", "1", "--n", "30", "--t", "40", "--k", "2", "--reps", "2",
         "--seed", "1", "--out", str(out)],
    )

    assert result.exit_code == 0, result.stdout
    lines = (out / "mc_report.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed0"] == 1
    assert {cell["method"] for cell in summary["cells"]} == {"cnar1", "cnar2", "nar"}


def test_benchmark_from_config_file(tmp_path: Path) -> None:
    out = tmp_path / "mc"
    config = tmp_path / "bench.toml"
    config.write_text(
        f'example = 5\nn = [30]\nt = [40]\nk = [2]\nreps = 1\nout = "{out.as_posix()}"\n'
    )

    result = runner.invoke(app, ["benchmark", "--config", str(config)])

    assert result.exit_code == 0, result.stdout
    summary = json.loads((out / "summary.json").read_text())
    assert summary["example"] == 5
    assert summary["grid"] == {"n": [30], "t": [40], "k": [2]}


def test_benchmark_rejects_unknown_example(tmp_path: Path) -> None:
    result = runner.invoke(app, ["benchmark", "--example", "9", "--out", str(tmp_path)])

    assert result.exit_code == 2
    assert not (tmp_path / "mc_report.csv").exists()
