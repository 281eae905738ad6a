"""Network generators used by the simulation examples."""

from .base import GeneratedNetwork, NetworkGenerator
from .factory import available_generators, create_generator, generator_defaults
from .registry import GeneratorRegistry

__all__ = [
    "GeneratedNetwork",
    "NetworkGenerator",
    "GeneratorRegistry",
    "create_generator",
    "available_generators",
    "generator_defaults",
]
