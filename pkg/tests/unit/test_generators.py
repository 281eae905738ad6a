"""Unit tests for the network generator plugins."""

import numpy as np
import pytest

from py_cnar.core.net import generate_sbm, planted_partition_spec
from py_cnar.core.rng import make_rng
from py_cnar.exceptions import CnarValidationError
from py_cnar.generators import (
    GeneratedNetwork,
    GeneratorRegistry,
    NetworkGenerator,
    available_generators,
    create_generator,
    generator_defaults,
)
from py_cnar.generators.base import empirical_connectivity

BUILT_IN = {"sbm", "spectral_forge", "powerlaw_cluster", "random_partition"}


def test_registry_lists_built_in_generators() -> None:
    """Test that all built-in generators are registered after lazy loading."""
    assert BUILT_IN <= set(available_generators())


def test_create_generator_invalid_name() -> None:
    """Test that an unknown generator raises a validation error."""
    with pytest.raises(CnarValidationError, match="Unknown generator 'lattice'"):
        create_generator("lattice")


def test_create_generator_invalid_parameters() -> None:
    with pytest.raises(CnarValidationError, match="Invalid parameters for generator 'sbm'"):
        create_generator("sbm", degree_fraction=0.5)


def test_registry_prevents_duplicate_registration() -> None:
    """Test that registering the same generator twice raises an error."""
    from py_cnar.generators.sbm import SbmGenerator

    available_generators()
    with pytest.raises(ValueError, match="already registered"):
        GeneratorRegistry.register(SbmGenerator)


def test_registry_unregister() -> None:
    """Test unregistering a generator."""
    available_generators()
    assert "random_partition" in GeneratorRegistry.list_generators()

    GeneratorRegistry.unregister("random_partition")
    assert "random_partition" not in GeneratorRegistry.list_generators()

    # Re-register for other tests
    from py_cnar.generators.partition import RandomPartitionGenerator

    GeneratorRegistry.register(RandomPartitionGenerator)
    assert "random_partition" in GeneratorRegistry.list_generators()


@pytest.mark.parametrize("name", sorted(BUILT_IN))
def test_generators_produce_valid_networks(name: str) -> None:
    """Test that every generator yields a simple graph with contiguous communities."""
    network = create_generator(name).generate([20, 30], make_rng(4))

    a = network.adjacency.a
    assert network.n == 50
    assert network.k == 2
    assert np.array_equal(a, a.T)
    assert not np.diag(a).any()
    assert network.membership.labels.tolist() == [0] * 20 + [1] * 30


@pytest.mark.parametrize("name", sorted(BUILT_IN))
def test_generators_are_deterministic(name: str) -> None:
    generator = create_generator(name)

    first = generator.generate([15, 15], make_rng(9))
    second = generator.generate([15, 15], make_rng(9))

    assert np.array_equal(first.adjacency.a, second.adjacency.a)


@pytest.mark.parametrize("name", sorted(BUILT_IN))
def test_generators_are_assortative(name: str) -> None:
    """Test that edges are denser within communities than between them."""
    network = create_generator(name).generate([40, 40], make_rng(6))

    q = empirical_connectivity(network.adjacency.a, network.membership.labels, 2)

    assert min(q[0, 0], q[1, 1]) > q[0, 1]


def test_powerlaw_cluster_limits_cross_edges() -> None:
    network = create_generator("powerlaw_cluster", max_cross_edges=3).generate(
        [30, 30, 30], make_rng(2)
    )

    a = network.adjacency.a
    labels = network.membership.labels
    cross = a[np.ix_(labels == 0, labels == 1)].sum()
    assert cross <= 3


def test_spectral_forge_rejects_bad_fraction() -> None:
    with pytest.raises(CnarValidationError, match="keep_fraction"):
        create_generator("spectral_forge", keep_fraction=0.0)


def test_empirical_connectivity_counts_pairs() -> None:
    a = np.array(
        [
            [0.0, 1.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )

    q = empirical_connectivity(a, np.array([0, 0, 1, 1]), 2)

    np.testing.assert_allclose(q, [[1.0, 0.25], [0.25, 1.0]])


def test_spectral_forge_keeps_full_spectrum_graph() -> None:
    """Test that keeping every eigenpair resamples the seed block-model graph unchanged."""
    seed_graph = generate_sbm(planted_partition_spec([20, 20], 0.9, 8 / 9), make_rng(5))

    network = create_generator("spectral_forge", keep_fraction=1.0).generate([20, 20], make_rng(5))

    np.testing.assert_array_equal(network.adjacency.a, seed_graph.a)


def test_registry_records_constructor_defaults() -> None:
    defaults = generator_defaults()

    assert defaults["spectral_forge"] == {"alpha_n": 0.9, "rho": 8 / 9, "keep_fraction": 0.95}
    assert defaults["random_partition"] == {"p_in": 0.9, "p_out": 0.1}
    assert set(defaults["powerlaw_cluster"]) == {"degree_fraction", "triangle_p", "max_cross_edges"}


def test_create_generator_names_unknown_parameters() -> None:
    with pytest.raises(CnarValidationError, match="degree_fraction.*accepted: alpha_n, rho"):
        create_generator("sbm", degree_fraction=0.5)


def test_registry_rejects_generator_without_defaults() -> None:
    class Ring(NetworkGenerator):
        def __init__(self, width: int) -> None:
            self.width = width

        @property
        def name(self) -> str:
            return "ring"

        def generate(self, n_per_block: list[int], rng: np.random.Generator) -> GeneratedNetwork:
            raise NotImplementedError

    with pytest.raises(ValueError, match="'width' needs a default value"):
        GeneratorRegistry.register(Ring)
    assert "ring" not in GeneratorRegistry.list_generators()
