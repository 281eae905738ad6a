"""Lookup and construction of registered network generators."""

from typing import Any

from ..exceptions import CnarValidationError
from .base import NetworkGenerator
from .registry import GeneratorRegistry

_registered = False


def _ensure_generators_registered() -> None:
    """Import the built-in generators so they self-register."""
    global _registered
    if _registered:
        return

    from . import forge, partition, powerlaw, sbm  # noqa: F401

    _registered = True


def create_generator(name: str, **params: Any) -> NetworkGenerator:
    """Instantiate a registered generator with example-specific parameters.

    Raises:
        CnarValidationError: If no generator with that name is registered, or a
            parameter is not one its constructor accepts
    """
    _ensure_generators_registered()

    entry = GeneratorRegistry.entry(name)
    if entry is None:
        available = GeneratorRegistry.list_generators()
        raise CnarValidationError(
            f"Unknown generator '{name}'. "
            f"Available generators: {', '.join(available) if available else 'none'}"
        )
    unknown = entry.unknown(params)
    if unknown:
        raise CnarValidationError(
            f"Invalid parameters for generator '{name}': {', '.join(unknown)} "
            f"(accepted: {', '.join(entry.defaults) or 'none'})"
        )
    return entry.generator_class(**params)


def available_generators() -> list[str]:
    _ensure_generators_registered()
    return GeneratorRegistry.list_generators()


def generator_defaults() -> dict[str, dict[str, Any]]:
    """Constructor defaults of every built-in generator, keyed by generator name."""
    _ensure_generators_registered()
    return GeneratorRegistry.describe()
