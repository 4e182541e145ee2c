"""Exception types; the CLI maps each to an exit code."""
from __future__ import annotations

from typing import Any


class EngineError(Exception):
    exit_code = 1

    def __init__(self, message: str, payload: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.payload = payload or {}


class ValidationError(EngineError):
    """A structure fails one of its axioms."""

    exit_code = 1


class ObstructionError(EngineError):
    """A construction is blocked by a nonzero cohomology class."""

    exit_code = 2


class InputError(EngineError):
    """Malformed or inconsistent input."""

    exit_code = 3


class UnsupportedInputError(InputError):
    """Input outside a size guard or a finiteness requirement."""
