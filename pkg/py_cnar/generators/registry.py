"""Registry of network generator plugins."""

import inspect
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any

from .base import NetworkGenerator


@dataclass(frozen=True)
class GeneratorEntry:
    """A registered generator class with the keyword parameters its constructor accepts."""

    generator_class: type[NetworkGenerator]
    defaults: MappingProxyType[str, Any]

    def unknown(self, params: dict[str, Any]) -> list[str]:
        return sorted(set(params) - set(self.defaults))


def _constructor_defaults(generator_class: type[NetworkGenerator]) -> dict[str, Any]:
    defaults: dict[str, Any] = {}
    for name, param in inspect.signature(generator_class.__init__).parameters.items():
        if name == "self" or param.kind in (param.VAR_POSITIONAL, param.VAR_KEYWORD):
            continue
        if param.default is param.empty:
            raise ValueError(
                f"{generator_class.__name__} parameter '{name}' needs a default value"
            )
        defaults[name] = param.default
    return defaults


class GeneratorRegistry:
    """Central registry for network generators.

    Generators self-register by calling GeneratorRegistry.register() when imported.
    Registration records the constructor's keyword defaults so parameters can be
    checked by name before a generator is built.
    """

    _generators: dict[str, GeneratorEntry] = {}

    @classmethod
    def register(cls, generator_class: type[NetworkGenerator]) -> None:
        """Register a generator class.

        Raises:
            ValueError: If the name is taken or a constructor parameter has no default
        """
        defaults = _constructor_defaults(generator_class)
        name = generator_class().name

        if name in cls._generators:
            raise ValueError(
                f"Generator '{name}' is already registered. "
                f"Cannot register {generator_class.__name__}."
            )

        cls._generators[name] = GeneratorEntry(generator_class, MappingProxyType(defaults))

    @classmethod
    def get(cls, name: str) -> type[NetworkGenerator] | None:
        entry = cls._generators.get(name)
        return None if entry is None else entry.generator_class

    @classmethod
    def entry(cls, name: str) -> GeneratorEntry | None:
        return cls._generators.get(name)

    @classmethod
    def describe(cls) -> dict[str, dict[str, Any]]:
        """Default keyword parameters of every registered generator, by name."""
        return {name: dict(entry.defaults) for name, entry in cls._generators.items()}

    @classmethod
    def list_generators(cls) -> list[str]:
        return list(cls._generators.keys())

    @classmethod
    def unregister(cls, name: str) -> None:
        """Unregister a generator (useful for testing)."""
        cls._generators.pop(name, None)
