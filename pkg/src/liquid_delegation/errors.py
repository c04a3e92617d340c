"""Exception hierarchy shared by the solvers, the document formats and the CLI."""

from typing import Optional


class DelegationError(Exception):
    """Base class for every error raised by liquid_delegation."""


class InvalidInputError(DelegationError, ValueError):
    """Malformed profile, delegation function, model or solver argument."""


class DocumentFormatError(InvalidInputError):
    """A text document could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ClassMismatchError(InvalidInputError):
    """The profile is not in the preference class a solver requires."""

    def __init__(self, message: str, witness: object = None):
        self.witness = witness
        super().__init__(message)


class SizeGuardError(DelegationError):
    """An exhaustive procedure was asked to run above its configured bound."""

    def __init__(self, message: str, size: int, bound: int):
        self.size = size
        self.bound = bound
        super().__init__(f"{message} (size {size} exceeds bound {bound})")


class ScriptInconsistencyError(InvalidInputError):
    """A scripted dynamics move is illegal for the voter holding the token."""

    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(f"step {step}: {message}")


class SolverInvariantError(DelegationError, AssertionError):
    """An internal invariant backed by an existence theorem failed."""
