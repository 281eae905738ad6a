"""Run-directory storage."""

from .files import RunStorage, atomic_write_text

__all__ = ["RunStorage", "atomic_write_text"]
