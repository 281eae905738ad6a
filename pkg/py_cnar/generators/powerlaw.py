"""Clusters of Holme-Kim power-law graphs joined by a few random edges (Example 4)."""

import networkx as nx
import numpy as np

from ..core.net import AdjacencyMatrix, SbmSpec
from .base import GeneratedNetwork, NetworkGenerator, empirical_connectivity
from .registry import GeneratorRegistry


class PowerlawClusterGenerator(NetworkGenerator):
    """Each community is a power-law cluster graph with m = degree_fraction * n_k.

    Between every pair of communities, Uniform{0..max_cross_edges} random edges are added.
    """

    def __init__(
        self,
        degree_fraction: float = 0.8,
        triangle_p: float = 0.1,
        max_cross_edges: int = 10,
    ) -> None:
        self.degree_fraction = degree_fraction
        self.triangle_p = triangle_p
        self.max_cross_edges = max_cross_edges

    @property
    def name(self) -> str:
        return "powerlaw_cluster"

    def generate(self, n_per_block: list[int], rng: np.random.Generator) -> GeneratedNetwork:
        n = sum(n_per_block)
        a = np.zeros((n, n))
        offsets = np.concatenate([[0], np.cumsum(n_per_block)])

        for block, size in enumerate(n_per_block):
            if size < 2:
                continue
            m = min(max(1, int(self.degree_fraction * size)), size - 1)
            graph = nx.powerlaw_cluster_graph(
                size, m, self.triangle_p, seed=self._seed_for_networkx(rng)
            )
            sub = nx.to_numpy_array(graph, nodelist=range(size))
            start = offsets[block]
            a[start : start + size, start : start + size] = sub

        k = len(n_per_block)
        for i in range(k):
            for j in range(i + 1, k):
                count = int(rng.integers(0, self.max_cross_edges + 1))
                src = rng.integers(offsets[i], offsets[i + 1], size=count)
                dst = rng.integers(offsets[j], offsets[j + 1], size=count)
                a[src, dst] = 1.0
                a[dst, src] = 1.0

        np.fill_diagonal(a, 0.0)
        a = (a > 0).astype(float)
        labels = np.repeat(np.arange(k), n_per_block)
        membership = SbmSpec.from_labels(labels, empirical_connectivity(a, labels, k), k=k)
        return GeneratedNetwork(adjacency=AdjacencyMatrix(a), membership=membership)


GeneratorRegistry.register(PowerlawClusterGenerator)
