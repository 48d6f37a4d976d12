"""Exception types shared across the solver and the CLI."""

from __future__ import annotations

from typing import Any


class ConfigurationError(ValueError):
    """Invalid topology, boundary condition, parameter set or config file."""


class NumericalError(RuntimeError):
    """A time step or solve failed; carries the partial run result if any."""

    def __init__(self, message: str, step: int | None = None) -> None:
        super().__init__(message)
        self.step = step
        self.partial: Any = None


class SingularCouplingError(NumericalError):
    """The junction coupling system lost rank."""

    def __init__(self, message: str, rows: list[int]) -> None:
        super().__init__(message)
        self.rows = rows
