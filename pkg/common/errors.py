from typing import Optional


class KaczmarzError(Exception):
    """Root of all errors raised by the solver library."""


class MatrixValidationError(KaczmarzError, ValueError):
    """A sparse matrix violates a structural invariant (zero row, bad offsets, bad columns)."""


class MatrixFormatError(MatrixValidationError):
    """A MatrixMarket or vector file could not be parsed."""

    def __init__(self, path: str, line_number: Optional[int], reason: str) -> None:
        self.path: str = path
        self.line_number: Optional[int] = line_number
        location: str = path if line_number is None else f"{path}:{line_number}"
        super().__init__(f"{location}: {reason}")


class IterateSolved(KaczmarzError):
    """The Kaczmarz cycle left the iterate unchanged, so it already solves Ax = b."""


class BreakdownError(KaczmarzError, ArithmeticError):
    """The search window lost positivity or independence in floating point."""
