"""Exception types shared across the package."""

from __future__ import annotations


class MatroidCGError(Exception):
    """Base class for all package errors."""


class DomainError(MatroidCGError):
    """An argument is outside the domain an object was defined on
    (unknown resource, missing table entry, weight lookup without weights)."""


class ContractError(MatroidCGError):
    """A documented precondition was violated by the caller."""


class ResourceLimitError(MatroidCGError):
    """An enumeration cap (ground-set size, profile count, step budget)
    would be exceeded; raised instead of silently grinding."""


class NotWeaklyMonotoneError(MatroidCGError):
    """An aggregation function failed the weak-monotonicity requirement on
    the quantification domain, so the induced total preorder does not exist.

    Carries the witness: (x, y, ctx_lt, ctx_gt) with g(ctx_lt, x) < g(ctx_lt, y)
    and g(ctx_gt, x) > g(ctx_gt, y).
    """

    def __init__(self, message: str, witness: tuple | None = None) -> None:
        super().__init__(message)
        self.witness = witness


class GameFormatError(MatroidCGError):
    """Syntax error in a game file; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(MatroidCGError):
    """Semantic error while loading a game (non-matroid base family,
    non-monotone cost, cardinality mismatch); carries a witness object."""

    def __init__(self, message: str, witness: object | None = None) -> None:
        super().__init__(message)
        self.witness = witness
