"""Exception hierarchy for py-cnar.

Validation failures derive from ``ValueError`` so callers that only know the
standard library contract keep working; the CLI maps them to exit code 2.
"""


class CnarError(Exception):
    """Base class for all py-cnar errors."""


class CnarValidationError(CnarError, ValueError):
    """Raised when an input violates a precondition (shape, range, invariant)."""


class StationarityError(CnarValidationError):
    """Raised when a simulation is refused because the parameters are not stationary."""

    def __init__(self, message: str, margin: float) -> None:
        super().__init__(message)
        self.margin = margin


class EstimationError(CnarError, RuntimeError):
    """Raised when a least-squares system cannot be solved reliably."""

    def __init__(self, message: str, condition: float | None = None) -> None:
        super().__init__(message)
        self.condition = condition
