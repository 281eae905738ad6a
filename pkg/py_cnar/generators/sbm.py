"""Planted-partition stochastic block model (Examples 1 and 3)."""

import numpy as np

from ..core.net import generate_sbm, planted_partition_spec
from .base import GeneratedNetwork, NetworkGenerator
from .registry import GeneratorRegistry


class SbmGenerator(NetworkGenerator):
    """Edge probability alpha_n within blocks and alpha_n * (1 - rho) between blocks."""

    def __init__(self, alpha_n: float = 0.9, rho: float = 8 / 9) -> None:
        self.alpha_n = alpha_n
        self.rho = rho

    @property
    def name(self) -> str:
        return "sbm"

    def generate(self, n_per_block: list[int], rng: np.random.Generator) -> GeneratedNetwork:
        spec = planted_partition_spec(n_per_block, self.alpha_n, self.rho)
        return GeneratedNetwork(adjacency=generate_sbm(spec, rng), membership=spec)


GeneratorRegistry.register(SbmGenerator)
