"""Numeric policy: exact rationals first, tolerance-classed floats otherwise.

Cost values are plain ``Fraction`` whenever the generating formula is
rational-closed; floats appear only on paths that genuinely need them
(L^p aggregation with a non-integer exponent).  Every comparison that feeds
an equilibrium or potential decision goes through the helpers here so the
strictness policy lives in one place: exact values compare exactly, float
values compare with an absolute tolerance (two values within tolerance are
considered equal).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import GameFormatError

FLOAT_TOL = 1e-9

Value = Fraction | float


def is_exact(x: Value) -> bool:
    return isinstance(x, (Fraction, int))


def value_cmp(a: Value, b: Value, tol: float = FLOAT_TOL) -> int:
    """Three-way compare under the numeric policy: -1, 0, or +1."""
    if is_exact(a) and is_exact(b):
        if a < b:
            return -1
        return 1 if a > b else 0
    fa, fb = float(a), float(b)
    if abs(fa - fb) <= tol:
        return 0
    return -1 if fa < fb else 1


def value_lt(a: Value, b: Value, tol: float = FLOAT_TOL) -> bool:
    """Strictly less under the policy (exact strict, or float gap > tol)."""
    return value_cmp(a, b, tol) < 0


def value_eq(a: Value, b: Value, tol: float = FLOAT_TOL) -> bool:
    return value_cmp(a, b, tol) == 0


def parse_rational(text: str, line: int | None = None) -> Fraction:
    """Parse an explicit rational literal: "3", "-1/2", "7/4"."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise GameFormatError(f"bad rational literal {text!r}: {exc}", line)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_value(x: Value) -> str:
    if is_exact(x):
        return format_rational(Fraction(x))
    return repr(float(x))


def exact_root(x: Fraction, p: int) -> Fraction | None:
    """Exact p-th root of a nonnegative rational, or None if irrational."""
    x = Fraction(x)
    if x < 0 or p < 1:
        return None
    if x == 0:
        return Fraction(0)

    def iroot(n: int) -> int | None:
        r = round(n ** (1.0 / p))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**p == n:
                return cand
        return None

    num = iroot(x.numerator)
    den = iroot(x.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)
