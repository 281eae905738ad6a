"""Test configuration for py-cnar."""

import logging
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest
from rich.logging import RichHandler

from py_cnar.config import get_settings
from py_cnar.config.presets import EXAMPLE_GAMMA
from py_cnar.core.net import AdjacencyMatrix, generate_sbm, planted_partition_spec
from py_cnar.core.rng import make_rng
from py_cnar.core.scenario import Scenario, ScenarioSpec, build_scenario


@pytest.fixture(autouse=True, scope="function")
def reset_settings(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> Generator[None, None, None]:
    """Give every test fresh settings and a private loadings cache."""
    monkeypatch.setenv("CNAR_LOADINGS_CACHE_DIR", str(tmp_path / "loadings"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
    # CLI invocations install a rich handler bound to the runner's captured stderr
    root = logging.getLogger()
    for handler in [h for h in root.handlers if isinstance(h, RichHandler)]:
        root.removeHandler(handler)


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(7)


@pytest.fixture
def small_adjacency() -> AdjacencyMatrix:
    """Two communities of 20 nodes from the planted-partition block model."""
    spec = planted_partition_spec([20, 20], alpha_n=0.9, rho=8 / 9)
    return generate_sbm(spec, make_rng(3))


@pytest.fixture
def noiseless_scenario() -> Scenario:
    """Noise-free CNAR data generated with the spectral embedding as basis."""
    spec = ScenarioSpec(
        n=40,
        k=2,
        t_len=60,
        gamma=EXAMPLE_GAMMA,
        noiseless=True,
        basis="embedding",
    )
    return build_scenario(spec, make_rng(11))


@pytest.fixture
def factor_scenario(tmp_path: Path) -> Scenario:
    """CNAR data with three-factor noise on 60 nodes."""
    spec = ScenarioSpec(n=60, k=2, t_len=120, gamma=EXAMPLE_GAMMA, m=3)
    return build_scenario(spec, make_rng(12), tmp_path / "loadings")
