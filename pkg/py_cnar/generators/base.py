"""Base interface for network generators."""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..core.net import AdjacencyMatrix, SbmSpec


@dataclass(frozen=True)
class GeneratedNetwork:
    """A sampled graph together with the community assignment that produced it."""

    adjacency: AdjacencyMatrix
    membership: SbmSpec

    @property
    def n(self) -> int:
        return self.adjacency.n

    @property
    def k(self) -> int:
        return self.membership.k


def empirical_connectivity(a: NDArray[np.float64], labels: NDArray[np.int64], k: int) -> NDArray:
    """Observed edge density for every (block, block) pair."""
    theta = np.zeros((labels.size, k))
    theta[np.arange(labels.size), labels] = 1.0
    sizes = theta.sum(axis=0)
    edges = theta.T @ a @ theta
    pairs = np.outer(sizes, sizes) - np.diag(sizes)
    q = np.divide(edges, pairs, out=np.zeros_like(edges), where=pairs > 0)
    return np.clip((q + q.T) / 2.0, 0.0, 1.0)


class NetworkGenerator(ABC):
    """Base class for network generator plugins.

    Every generator must be constructible without arguments (defaults reproduce
    the corresponding benchmark example) so the registry can read its name.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Unique generator identifier (e.g., 'sbm', 'random_partition')."""
        pass

    @abstractmethod
    def generate(self, n_per_block: list[int], rng: np.random.Generator) -> GeneratedNetwork:
        """Sample a network with contiguous communities of the given sizes.

        Args:
            n_per_block: Community sizes; nodes are numbered block by block
            rng: Seeded random generator; the output is a pure function of its state

        Returns:
            GeneratedNetwork with the adjacency matrix and membership
        """
        pass

    @staticmethod
    def _seed_for_networkx(rng: np.random.Generator) -> int:
        return int(rng.integers(0, 2**32 - 1))
