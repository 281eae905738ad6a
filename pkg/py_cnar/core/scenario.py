"""Simulated data sets: a network, its true coefficients and a generated panel.

Shared by the ``simulate`` command and the Monte-Carlo benchmark so both draw
data the same way. Draw order from the single generator: network first, then
the panel.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray

from ..exceptions import CnarValidationError
from .model import (
    CnarParams,
    FactorNoiseSpec,
    PanelSeries,
    example_b1,
    example_loadings,
    nar_equivalent_b,
    simulate_cnar,
    simulate_nar,
)
from .net import (
    AdjacencyMatrix,
    SbmSpec,
    equal_blocks,
    membership_basis,
    row_normalize,
    spectral_embed,
)

logger = logging.getLogger(__name__)

Matrix = NDArray[np.float64]


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to draw one synthetic data set."""

    generator: str = "sbm"
    dgp: Literal["cnar", "nar"] = "cnar"
    n: int = 200
    k: int = 2
    t_len: int = 200
    burn_in: int = 200
    alpha_n: float = 0.9
    rho: float = 8 / 9
    b1_diag: tuple[float, ...] | None = None
    beta1: float = 0.5
    beta2: float = 0.3
    gamma: tuple[float, ...] = ()
    m: int = 3
    sigma_e: float = 1.0
    noiseless: bool = False
    basis: Literal["membership", "embedding"] = "membership"

    def generator_params(self) -> dict[str, Any]:
        if self.generator in ("sbm", "spectral_forge"):
            return {"alpha_n": self.alpha_n, "rho": self.rho}
        return {}


@dataclass(frozen=True)
class Scenario:
    """A drawn data set and the truth it was generated from.

    ``params`` are the CNAR coefficients in ``basis``; for NAR data they are the
    community-level equivalent of beta1 * A_tilde. ``phi`` is the true network
    coefficient matrix of the generating model.
    """

    spec: ScenarioSpec
    adjacency: AdjacencyMatrix
    membership: SbmSpec
    basis: Matrix
    params: CnarParams
    noise: FactorNoiseSpec | None
    panel: PanelSeries

    @property
    def a_tilde(self) -> Matrix:
        return row_normalize(self.adjacency)

    @property
    def phi(self) -> Matrix:
        if self.spec.dgp == "nar":
            return self.spec.beta1 * self.a_tilde
        return np.asarray(self.basis @ self.params.b1 @ self.basis.T)

    @property
    def phi_community(self) -> Matrix:
        """Theta B Theta^T, the best CNAR approximation of the generating network effect."""
        return np.asarray(self.basis @ self.params.b1 @ self.basis.T)

    @property
    def loadings(self) -> Matrix | None:
        return None if self.noise is None else self.noise.loadings


def build_scenario(
    spec: ScenarioSpec,
    rng: np.random.Generator,
    loadings_cache_dir: str | Path | None = None,
) -> Scenario:
    # deferred: the generator plugins import core.net
    from ..generators import create_generator

    generator = create_generator(spec.generator, **spec.generator_params())
    network = generator.generate(equal_blocks(spec.n, spec.k), rng)
    membership = network.membership

    if spec.noiseless:
        noise = None
    elif spec.m == 0:
        noise = FactorNoiseSpec(np.zeros((spec.n, 0)), sigma_e=spec.sigma_e)
    else:
        noise = FactorNoiseSpec(
            example_loadings(spec.n, spec.m, loadings_cache_dir), sigma_e=spec.sigma_e
        )
    gamma = np.asarray(spec.gamma, dtype=float)

    if spec.dgp == "nar":
        a_tilde = row_normalize(network.adjacency)
        panel = simulate_nar(
            a_tilde, spec.beta1, spec.beta2, gamma, noise, spec.t_len, rng, burn_in=spec.burn_in
        )
        basis = membership_basis(membership)
        # Theta B Theta^T = U (D^{1/2} B D^{1/2}) U^T with U = Theta D^{-1/2}
        root = np.sqrt(membership.block_sizes.astype(float))
        b = nar_equivalent_b(spec.beta1, a_tilde, membership)
        params = CnarParams(b1=root[:, None] * b * root[None, :], beta2=spec.beta2, gamma=gamma)
    else:
        if spec.basis == "embedding":
            basis = spectral_embed(network.adjacency, spec.k).u_hat
        else:
            basis = membership_basis(membership)
        if spec.b1_diag is not None:
            if len(spec.b1_diag) != spec.k:
                raise CnarValidationError(
                    f"b1_diag has {len(spec.b1_diag)} entries, expected k={spec.k}"
                )
            b1 = np.diag(np.asarray(spec.b1_diag, dtype=float))
        else:
            b1 = example_b1(spec.k)
        params = CnarParams(b1=b1, beta2=spec.beta2, gamma=gamma)
        panel = simulate_cnar(basis, params, noise, spec.t_len, rng, burn_in=spec.burn_in)

    logger.debug(
        "scenario %s/%s n=%d k=%d t_len=%d m=%d", spec.generator, spec.dgp, spec.n, spec.k,
        spec.t_len, spec.m,
    )
    return Scenario(
        spec=spec,
        adjacency=network.adjacency,
        membership=membership,
        basis=basis,
        params=params,
        noise=noise,
        panel=panel,
    )
