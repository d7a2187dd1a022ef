"""Cost functions, aggregation functions, and the induced preorder.

Resource costs come in three set-function representations (count-based,
weight-induced, explicit subset table), all monotone nondecreasing by
contract and checkable with witnesses.  Player costs are built from them
by an aggregation function: sum, max, L^p, or an explicit
permutation-invariant table over a finite value grid.

A weakly monotone aggregation function g induces a total preorder on cost
values: x precedes y when substituting x for the last argument never
yields a larger g value, over every context vector.  Built-in aggregators
decide this numerically; table aggregators decide it by exhaustive
quantification over a finite context domain, which is why every verdict
produced that way is only certified on the domain it was quantified over.
"""

from __future__ import annotations

import functools
import itertools
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import ContractError, DomainError, NotWeaklyMonotoneError, ResourceLimitError
from .values import FLOAT_TOL, Value, exact_root, value_cmp

SUBSET_CHECK_CAP = 16  # 2^n covering-pair scans refuse beyond this


def players_set(n: int) -> tuple[int, ...]:
    return tuple(range(1, n + 1))


def subsets(players) -> list[frozenset]:
    """All subsets of an iterable of players, by size then canonical order."""
    players = sorted(players)
    out = []
    for k in range(len(players) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(players, k))
    return out


# ---------------------------------------------------------------------------
# scalar cost functions (arguments: counts or nonnegative reals)


@dataclass(frozen=True)
class TableFn:
    """Count-indexed values: values[k] is the cost at k users."""

    values: tuple[Fraction, ...]
    kind = "count"

    def __call__(self, k) -> Fraction:
        k = int(k)
        if not 0 <= k < len(self.values):
            raise DomainError(f"count {k} outside cost table of size {len(self.values)}")
        return self.values[k]


@dataclass(frozen=True)
class PolyFn:
    """Polynomial with rational coefficients, evaluated at rational points."""

    coeffs: tuple[Fraction, ...]
    kind = "poly"

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc


@dataclass(frozen=True)
class StepFn:
    """Right-continuous step function: levels[j] for the largest
    thresholds[j] <= t.  thresholds[0] must be 0."""

    thresholds: tuple[Fraction, ...]
    levels: tuple[Fraction, ...]
    kind = "steps"

    def __post_init__(self):
        if not self.thresholds or self.thresholds[0] != 0:
            raise ContractError("step function must start at threshold 0")
        if list(self.thresholds) != sorted(set(self.thresholds)):
            raise ContractError("step thresholds must be strictly increasing")
        if len(self.thresholds) != len(self.levels):
            raise ContractError("thresholds and levels differ in length")

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        if t < 0:
            raise DomainError("step function argument must be nonnegative")
        return self.levels[bisect_right(self.thresholds, t) - 1]


@dataclass(frozen=True)
class CallableFn:
    """Adapter for in-code cost formulas; not serializable to game files."""

    fn: object
    kind = "callable"

    def __call__(self, x) -> Fraction:
        return Fraction(self.fn(x))


# ---------------------------------------------------------------------------
# set-functional costs


class SetCost:
    """Monotone set function on player subsets; one per resource/channel."""

    repr_kind: str

    def value(self, X: frozenset, weights=None) -> Fraction:
        raise NotImplementedError


@dataclass(frozen=True)
class CountCost(SetCost):
    fn: object  # TableFn / CallableFn
    repr_kind = "count"

    def value(self, X, weights=None) -> Fraction:
        return Fraction(self.fn(len(X)))


@dataclass(frozen=True)
class WeightCost(SetCost):
    """Weight-induced set cost: inner function of the total player weight."""

    fn: object  # PolyFn / StepFn / CallableFn
    weights: tuple[Fraction, ...] | None = None  # indexed by player-1

    def with_weights(self, weights) -> "WeightCost":
        return WeightCost(self.fn, tuple(Fraction(w) for w in weights))

    repr_kind = "weight"

    def value(self, X, weights=None) -> Fraction:
        w = weights if weights is not None else self.weights
        if w is None:
            raise DomainError("weight-induced cost evaluated without player weights")
        total = sum((Fraction(w[i - 1]) for i in X), Fraction(0))
        return Fraction(self.fn(total))


@dataclass(frozen=True)
class TableCost(SetCost):
    """Explicit subset table; must be total over 2^N at desk scale."""

    entries: dict  # frozenset[int] -> Fraction
    repr_kind = "table"

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    def value(self, X, weights=None) -> Fraction:
        X = frozenset(X)
        if X not in self.entries:
            raise DomainError(f"no table entry for player subset {sorted(X)}")
        return self.entries[X]


def eval_set_cost(c: SetCost, X, weights=None) -> Fraction:
    """Cost of the player subset X under c (weights needed for the
    weight-induced representation unless already bound)."""
    return c.value(frozenset(X), weights)


@dataclass(frozen=True)
class MonotoneVerdict:
    ok: bool
    witness: tuple | None = None  # (X, Y) covering pair with c(X) > c(Y)

    def __bool__(self) -> bool:
        return self.ok


def check_monotone_set_cost(c: SetCost, n: int, weights=None) -> MonotoneVerdict:
    """Monotone nondecreasing in set inclusion, or a covering-pair witness.

    Count-based costs are checked along the only achievable argument values
    0..n; the other representations scan all covering subset pairs.
    """
    players = players_set(n)
    if isinstance(c, CountCost):
        for k in range(n):
            if c.fn(k) > c.fn(k + 1):
                return MonotoneVerdict(False, (frozenset(players[:k]), frozenset(players[: k + 1])))
        return MonotoneVerdict(True)
    if n > SUBSET_CHECK_CAP:
        raise ResourceLimitError(f"{n} players exceeds subset scan cap {SUBSET_CHECK_CAP}")
    for X in subsets(players):
        vx = c.value(X, weights)
        for j in players:
            if j not in X:
                Y = X | {j}
                if vx > c.value(Y, weights):
                    return MonotoneVerdict(False, (X, Y))
    return MonotoneVerdict(True)


# ---------------------------------------------------------------------------
# aggregation functions


class Aggregator:
    """g: cost vector -> player cost.  ``value`` is the displayed result;
    ``key`` is an order-isomorphic quantity safe for exact comparison
    (e.g. the p-th power sum for integer-p L^p)."""

    kind: str
    r: int | None  # fixed arity; None = any arity (built-ins)
    monotonicity_class: str

    def _check_arity(self, vs) -> None:
        if self.r is not None and len(vs) != self.r:
            raise ContractError(f"aggregator of arity {self.r} applied to {len(vs)} values")

    def value(self, vs) -> Value:
        raise NotImplementedError

    def key(self, vs) -> Value:
        return self.value(vs)

    def exact_keys(self) -> bool:
        return True


@dataclass(frozen=True)
class SumAgg(Aggregator):
    r: int | None = None
    kind = "sum"
    monotonicity_class = "coordinate-monotone"

    def value(self, vs):
        self._check_arity(vs)
        return sum(vs, Fraction(0))


@dataclass(frozen=True)
class MaxAgg(Aggregator):
    r: int | None = None
    kind = "max"
    monotonicity_class = "coordinate-monotone"

    def value(self, vs):
        self._check_arity(vs)
        return max(vs, default=Fraction(0))


@dataclass(frozen=True)
class LpAgg(Aggregator):
    """L^p norm of the cost vector, p >= 1.  Integer p compares through the
    power sum and stays exact; fractional p falls back to floats."""

    p: Fraction
    r: int | None = None
    kind = "lp"

    def __post_init__(self):
        object.__setattr__(self, "p", Fraction(self.p))
        if self.p < 1:
            raise ContractError("L^p aggregation requires p >= 1")

    monotonicity_class = "coordinate-monotone"

    @property
    def integer_p(self) -> bool:
        return self.p.denominator == 1

    def key(self, vs):
        self._check_arity(vs)
        if self.integer_p:
            e = self.p.numerator
            return sum((Fraction(v) ** e for v in vs), Fraction(0))
        return float(sum(float(v) ** float(self.p) for v in vs)) ** (1.0 / float(self.p))

    def value(self, vs):
        k = self.key(vs)
        if not self.integer_p:
            return k
        root = exact_root(k, self.p.numerator)
        return root if root is not None else float(k) ** (1.0 / int(self.p))

    def exact_keys(self) -> bool:
        return self.integer_p


@dataclass(frozen=True)
class TableAgg(Aggregator):
    """Explicit r-ary aggregation table over a finite value grid, stored
    with sorted argument tuples (permutation invariance by construction)."""

    grid: tuple[Fraction, ...]
    entries: dict  # tuple(sorted values) -> Fraction
    r: int = 2
    kind = "table"
    monotonicity_class = "unknown"

    def __hash__(self):
        return hash((self.grid, self.r, frozenset(self.entries.items())))

    def __post_init__(self):
        if list(self.grid) != sorted(set(self.grid)):
            raise ContractError("aggregator grid must be strictly increasing")
        expected = {
            tuple(sorted(c)) for c in itertools.combinations_with_replacement(self.grid, self.r)
        }
        if set(self.entries) != expected:
            raise ContractError("aggregation table must be total over sorted grid tuples")

    def value(self, vs):
        self._check_arity(vs)
        key = tuple(sorted(Fraction(v) for v in vs))
        if key not in self.entries:
            raise DomainError(f"aggregation table has no entry for {key}")
        return self.entries[key]


def aggregate(g: Aggregator, vs) -> Value:
    """Apply the aggregation function to a cost vector."""
    return g.value(tuple(vs))


# ---------------------------------------------------------------------------
# the induced preorder


class PreorderVerdict(Enum):
    """Relation of two cost values under all contexts of g.

    STRICT_LESS / STRICT_GREATER: strict in every context.
    LESS_EQ / GREATER_EQ: never worse, strict somewhere, tied somewhere.
    EQUIVALENT: tied in every context.
    """

    STRICT_LESS = "strict-less"
    LESS_EQ = "less-eq"
    EQUIVALENT = "equivalent"
    GREATER_EQ = "greater-eq"
    STRICT_GREATER = "strict-greater"

    @property
    def le(self) -> bool:
        """x precedes-or-ties y in every context."""
        return self in (PreorderVerdict.STRICT_LESS, PreorderVerdict.LESS_EQ, PreorderVerdict.EQUIVALENT)

    @property
    def lt(self) -> bool:
        """Strict precedence: never worse, better somewhere."""
        return self in (PreorderVerdict.STRICT_LESS, PreorderVerdict.LESS_EQ)

    @property
    def eq(self) -> bool:
        return self is PreorderVerdict.EQUIVALENT

    @property
    def ge(self) -> bool:
        return self in (PreorderVerdict.STRICT_GREATER, PreorderVerdict.GREATER_EQ, PreorderVerdict.EQUIVALENT)

    @property
    def gt(self) -> bool:
        return self in (PreorderVerdict.STRICT_GREATER, PreorderVerdict.GREATER_EQ)


def _classify(lt: bool, eq: bool, gt: bool, x, y, ctx_lt, ctx_gt) -> PreorderVerdict:
    if lt and gt:
        raise NotWeaklyMonotoneError(
            f"aggregator orders {x} and {y} inconsistently across contexts",
            witness=(x, y, ctx_lt, ctx_gt),
        )
    if lt:
        return PreorderVerdict.LESS_EQ if eq else PreorderVerdict.STRICT_LESS
    if gt:
        return PreorderVerdict.GREATER_EQ if eq else PreorderVerdict.STRICT_GREATER
    return PreorderVerdict.EQUIVALENT


def preorder_compare(g: Aggregator, x: Value, y: Value, domain=None,
                     tol: float = FLOAT_TOL) -> PreorderVerdict:
    """Relate two cost values under the preorder induced by g.

    Coordinate-monotone built-ins are decided numerically; max additionally
    reports where ties are forced by large contexts.  Table aggregators
    quantify contexts exhaustively over ``domain`` (default: their grid),
    so their verdicts hold on that finite domain only.
    """
    c = value_cmp(x, y, tol)
    if c == 0:
        return PreorderVerdict.EQUIVALENT
    if isinstance(g, (SumAgg, LpAgg)):
        return PreorderVerdict.STRICT_LESS if c < 0 else PreorderVerdict.STRICT_GREATER
    if isinstance(g, MaxAgg):
        if g.r == 1:
            return PreorderVerdict.STRICT_LESS if c < 0 else PreorderVerdict.STRICT_GREATER
        hi = x if c > 0 else y
        tie = domain is None or any(value_cmp(d, hi, tol) >= 0 for d in domain)
        if c < 0:
            return PreorderVerdict.LESS_EQ if tie else PreorderVerdict.STRICT_LESS
        return PreorderVerdict.GREATER_EQ if tie else PreorderVerdict.STRICT_GREATER
    if isinstance(g, TableAgg):
        if domain is None:
            domain = g.grid
        lt = eq = gt = False
        ctx_lt = ctx_gt = None
        for ctx in itertools.product(domain, repeat=g.r - 1):
            c2 = value_cmp(g.value((*ctx, x)), g.value((*ctx, y)), tol)
            if c2 < 0:
                lt, ctx_lt = True, ctx
            elif c2 > 0:
                gt, ctx_gt = True, ctx
            else:
                eq = True
        return _classify(lt, eq, gt, x, y, ctx_lt, ctx_gt)
    raise ContractError(f"unknown aggregator {g!r}")


@dataclass(frozen=True)
class WeakMonotonicityVerdict:
    ok: bool
    # (x, y, ctx_low, ctx_high, (g(ctx_low,x), g(ctx_low,y), g(ctx_high,x), g(ctx_high,y)))
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_weak_monotonicity(g: Aggregator, domain) -> WeakMonotonicityVerdict:
    """Weak monotonicity of g over a finite value domain: for every value
    pair, substitution into the last argument is uniformly <= or uniformly
    >= across all contexts.  Coordinate-monotone built-ins pass outright;
    tables are quantified exhaustively and failures come with the four
    evaluations that exhibit the sign flip."""
    if g.monotonicity_class == "coordinate-monotone":
        return WeakMonotonicityVerdict(True)
    if not isinstance(g, TableAgg):
        return WeakMonotonicityVerdict(True)
    domain = sorted(set(domain))
    for x, y in itertools.combinations(domain, 2):
        ctx_lt = ctx_gt = None
        vals_lt = vals_gt = None
        for ctx in itertools.product(domain, repeat=g.r - 1):
            gx, gy = g.value((*ctx, x)), g.value((*ctx, y))
            c = value_cmp(gx, gy)
            if c < 0 and ctx_lt is None:
                ctx_lt, vals_lt = ctx, (gx, gy)
            elif c > 0 and ctx_gt is None:
                ctx_gt, vals_gt = ctx, (gx, gy)
            if ctx_lt is not None and ctx_gt is not None:
                return WeakMonotonicityVerdict(
                    False, (x, y, ctx_lt, ctx_gt, (*vals_lt, *vals_gt))
                )
    return WeakMonotonicityVerdict(True)


@dataclass(frozen=True)
class CostWrtGVerdict:
    ok: bool
    witness: tuple | None = None  # (X, Y) with not c(X) preceq_g c(Y)

    def __bool__(self) -> bool:
        return self.ok


def check_cost_monotone_wrt_g(c: SetCost, g: Aggregator, n: int, domain,
                              weights=None) -> CostWrtGVerdict:
    """Monotone nondecreasing with respect to g: growing the user set never
    moves the cost backwards in the preorder.  Covering pairs suffice by
    transitivity of the preorder."""
    players = players_set(n)
    if n > SUBSET_CHECK_CAP:
        raise ResourceLimitError(f"{n} players exceeds subset scan cap {SUBSET_CHECK_CAP}")
    for X in subsets(players):
        vx = c.value(X, weights)
        for j in players:
            if j not in X:
                Y = X | {j}
                if not preorder_compare(g, vx, c.value(Y, weights), domain).le:
                    return CostWrtGVerdict(False, (X, Y))
    return CostWrtGVerdict(True)


class ValueOrder:
    """Equivalence-class ranks of a finite value domain under the preorder
    of g; ranks feed the potential's pairwise lexicographic comparisons.

    Built-in aggregators order values numerically.  Table aggregators are
    sorted by the preorder itself (which may disagree with numeric order),
    so construction requires weak monotonicity on the domain and raises
    NotWeaklyMonotoneError otherwise.
    """

    def __init__(self, g: Aggregator, domain, tol: float = FLOAT_TOL):
        vals = sorted(set(Fraction(v) for v in domain))
        self.aggregator = g
        self.domain = tuple(vals)
        if isinstance(g, TableAgg):
            def cmp(a, b):
                v = preorder_compare(g, a, b, self.domain, tol)
                if v.eq:
                    return 0
                return -1 if v.lt else 1

            vals = sorted(vals, key=functools.cmp_to_key(cmp))
        classes: list[list[Fraction]] = []
        for v in vals:
            if classes and preorder_compare(g, classes[-1][-1], v, self.domain, tol).eq:
                classes[-1].append(v)
            else:
                classes.append([v])
        self.classes = tuple(tuple(c) for c in classes)
        self._rank = {v: k for k, cls in enumerate(self.classes) for v in cls}

    def rank_of(self, v) -> int:
        v = Fraction(v)
        if v not in self._rank:
            raise DomainError(f"value {v} outside the certified domain")
        return self._rank[v]
