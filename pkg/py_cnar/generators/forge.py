"""Spectrally forged graphs (Example 2).

A planted-partition graph is sampled and handed to networkx's spectral graph
forge, which keeps the leading ``keep_fraction`` of its eigenpairs (by absolute
eigenvalue), clips the low-rank reconstruction to [0, 1] and resamples every
edge from it. The result shares the block model's leading eigenstructure
without being a block model itself.
"""

import networkx as nx
import numpy as np

from ..core.net import AdjacencyMatrix, generate_sbm, planted_partition_spec
from ..exceptions import CnarValidationError
from .base import GeneratedNetwork, NetworkGenerator
from .registry import GeneratorRegistry


class SpectralForgeGenerator(NetworkGenerator):
    def __init__(
        self, alpha_n: float = 0.9, rho: float = 8 / 9, keep_fraction: float = 0.95
    ) -> None:
        if not 0.0 < keep_fraction <= 1.0:
            raise CnarValidationError(f"keep_fraction must lie in (0, 1], got {keep_fraction}")
        self.alpha_n = alpha_n
        self.rho = rho
        self.keep_fraction = keep_fraction

    @property
    def name(self) -> str:
        return "spectral_forge"

    def generate(self, n_per_block: list[int], rng: np.random.Generator) -> GeneratedNetwork:
        spec = planted_partition_spec(n_per_block, self.alpha_n, self.rho)
        seed_graph = nx.from_numpy_array(generate_sbm(spec, rng).a)

        forged = nx.spectral_graph_forge(
            seed_graph,
            self.keep_fraction,
            transformation="identity",
            seed=self._seed_for_networkx(rng),
        )
        a = nx.to_numpy_array(forged, nodelist=range(spec.n))
        np.fill_diagonal(a, 0.0)
        return GeneratedNetwork(adjacency=AdjacencyMatrix((a > 0).astype(float)), membership=spec)


GeneratorRegistry.register(SpectralForgeGenerator)
