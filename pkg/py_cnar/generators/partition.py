"""Random partition graph (Example 5)."""

import networkx as nx
import numpy as np

from ..core.net import AdjacencyMatrix, SbmSpec
from .base import GeneratedNetwork, NetworkGenerator
from .registry import GeneratorRegistry


class RandomPartitionGenerator(NetworkGenerator):
    def __init__(self, p_in: float = 0.9, p_out: float = 0.1) -> None:
        self.p_in = p_in
        self.p_out = p_out

    @property
    def name(self) -> str:
        return "random_partition"

    def generate(self, n_per_block: list[int], rng: np.random.Generator) -> GeneratedNetwork:
        graph = nx.random_partition_graph(
            list(n_per_block), self.p_in, self.p_out, seed=self._seed_for_networkx(rng)
        )
        n = sum(n_per_block)
        a = nx.to_numpy_array(graph, nodelist=range(n))
        k = len(n_per_block)
        q = self.p_out * np.ones((k, k)) + (self.p_in - self.p_out) * np.eye(k)
        membership = SbmSpec.from_labels(np.repeat(np.arange(k), n_per_block), q, k=k)
        return GeneratedNetwork(adjacency=AdjacencyMatrix(a), membership=membership)


GeneratorRegistry.register(RandomPartitionGenerator)
