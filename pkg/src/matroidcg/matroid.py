"""Matroid oracles over small ground sets.

Four concrete kinds back player strategy spaces: uniform, partition,
graphic (spanning trees of a connected multigraph), and explicit base
lists.  A fifth, non-matroid kind (ExplicitStrategies) exists so that
games outside the matroid assumption can be built and shown to lack
equilibria; it deliberately fails ``is_matroid``.

All oracles are immutable after construction.  Enumeration paths are
capped (default 20 ground elements); membership and greedy queries are
not.  Every tie is broken by the canonical element order fixed at
construction, which makes all downstream dynamics replayable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import ContractError, DomainError, ResourceLimitError

ENUMERATION_CAP = 20


class GroundSet:
    """Ordered set of resource identifiers; the order is canonical."""

    def __init__(self, elements: tuple[str, ...] | list[str]):
        elements = tuple(elements)
        if len(set(elements)) != len(elements):
            raise ContractError("ground set identifiers must be unique")
        self.elements = elements
        self.index = {e: k for k, e in enumerate(elements)}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, e: str) -> bool:
        return e in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, GroundSet) and self.elements == other.elements

    def __repr__(self) -> str:
        return f"GroundSet({list(self.elements)!r})"

    def sort(self, subset) -> tuple[str, ...]:
        """Subset in canonical element order."""
        return tuple(sorted(subset, key=self.index.__getitem__))

    def subset_key(self, subset) -> tuple[int, ...]:
        return tuple(sorted(self.index[e] for e in subset))

    def check_subset(self, subset) -> None:
        for e in subset:
            if e not in self.index:
                raise DomainError(f"element {e!r} outside ground set")


class StrategySpace:
    """Common surface of matroid oracles and raw strategy lists."""

    ground: GroundSet
    kind: str = "abstract"

    def contains(self, S: frozenset) -> bool:
        raise NotImplementedError

    def strategies(self) -> list[frozenset]:
        """All strategies, canonically ordered.  Capped for matroids."""
        raise NotImplementedError

    def support(self) -> frozenset:
        """Elements appearing in at least one strategy."""
        return frozenset().union(*self.strategies())

    def is_matroid(self) -> bool:
        return False

    def smallest(self) -> frozenset:
        """Canonically first strategy (default initial choice)."""
        return self.strategies()[0]


class MatroidOracle(StrategySpace):
    """Base-family oracle: membership, independence, bases, rank."""

    rank: int

    def is_independent(self, S: frozenset) -> bool:
        raise NotImplementedError

    def contains(self, S: frozenset) -> bool:
        return is_base(self, S)

    def strategies(self) -> list[frozenset]:
        return enumerate_bases(self)

    def is_matroid(self) -> bool:
        return True

    def smallest(self) -> frozenset:
        return min_weight_base(self, lambda e: Fraction(0))


class UniformMatroid(MatroidOracle):
    kind = "uniform"

    def __init__(self, ground: GroundSet, rank: int):
        if not 0 <= rank <= len(ground):
            raise ContractError(f"uniform rank {rank} infeasible on {len(ground)} elements")
        self.ground = ground
        self.rank = rank

    def is_independent(self, S: frozenset) -> bool:
        self.ground.check_subset(S)
        return len(S) <= self.rank

    def is_base_set(self, S: frozenset) -> bool:
        return len(S) == self.rank


class PartitionMatroid(MatroidOracle):
    """Blocks partition the ground set; a base takes cap_b elements per block."""

    kind = "partition"

    def __init__(self, ground: GroundSet, blocks: list[tuple[frozenset, int]]):
        seen: set[str] = set()
        for block, cap in blocks:
            ground.check_subset(block)
            if cap < 0 or cap > len(block):
                raise ContractError(f"block capacity {cap} infeasible for block of size {len(block)}")
            if seen & set(block):
                raise ContractError("partition blocks overlap")
            seen |= set(block)
        if seen != set(ground.elements):
            raise ContractError("partition blocks must cover the ground set")
        self.ground = ground
        self.blocks = [(frozenset(b), int(c)) for b, c in blocks]
        self.rank = sum(c for _, c in blocks)
        self._block_of = {e: k for k, (b, _) in enumerate(self.blocks) for e in b}

    def _counts(self, S: frozenset) -> list[int]:
        counts = [0] * len(self.blocks)
        for e in S:
            counts[self._block_of[e]] += 1
        return counts

    def is_independent(self, S: frozenset) -> bool:
        self.ground.check_subset(S)
        return all(c <= cap for c, (_, cap) in zip(self._counts(S), self.blocks))

    def is_base_set(self, S: frozenset) -> bool:
        return all(c == cap for c, (_, cap) in zip(self._counts(S), self.blocks))


class GraphicMatroid(MatroidOracle):
    """Spanning trees of a connected multigraph; resources are edges."""

    kind = "graphic"

    def __init__(self, ground: GroundSet, edges: dict[str, tuple[str, str]]):
        if set(edges) != set(ground.elements):
            raise ContractError("edge map must cover exactly the ground set")
        self.ground = ground
        self.edges = {e: (str(u), str(v)) for e, (u, v) in edges.items()}
        verts: set[str] = set()
        for u, v in self.edges.values():
            verts.update((u, v))
        self.vertices = tuple(sorted(verts))
        self.rank = len(self.vertices) - 1
        if not self._connected():
            raise ContractError("graphic matroid requires a connected graph")

    def _connected(self) -> bool:
        if not self.vertices:
            return False
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges.values():
            parent[find(u)] = find(v)
        roots = {find(v) for v in self.vertices}
        return len(roots) == 1

    def is_independent(self, S: frozenset) -> bool:
        self.ground.check_subset(S)
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in S:
            u, v = self.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def is_base_set(self, S: frozenset) -> bool:
        return len(S) == self.rank and self.is_independent(S)


class ExplicitBases(MatroidOracle):
    """Untrusted base list; run verify_base_axioms before using in a game."""

    kind = "explicit"

    def __init__(self, ground: GroundSet, bases: list[frozenset]):
        if not bases:
            raise ContractError("explicit base family must be nonempty")
        for B in bases:
            ground.check_subset(B)
        sizes = {len(B) for B in bases}
        if len(sizes) != 1:
            raise ContractError(f"bases of differing cardinality: {sorted(sizes)}")
        self.ground = ground
        self.bases = sorted({frozenset(B) for B in bases}, key=ground.subset_key)
        self._base_set = set(self.bases)
        self.rank = len(self.bases[0])

    def is_independent(self, S: frozenset) -> bool:
        self.ground.check_subset(S)
        return any(S <= B for B in self.bases)

    def is_base_set(self, S: frozenset) -> bool:
        return frozenset(S) in self._base_set


class ExplicitStrategies(StrategySpace):
    """Raw strategy list: no matroid structure claimed or required."""

    kind = "strategies"

    def __init__(self, ground: GroundSet, sets: list[frozenset]):
        if not sets:
            raise ContractError("strategy list must be nonempty")
        for S in sets:
            ground.check_subset(S)
        self.ground = ground
        self.sets = sorted({frozenset(S) for S in sets}, key=ground.subset_key)
        self._set = set(self.sets)

    def contains(self, S: frozenset) -> bool:
        return frozenset(S) in self._set

    def strategies(self) -> list[frozenset]:
        return list(self.sets)


def is_base(M: MatroidOracle, S) -> bool:
    """Membership in the base family of M."""
    S = frozenset(S)
    M.ground.check_subset(S)
    return M.is_base_set(S)


def enumerate_bases(M: MatroidOracle, cap: int = ENUMERATION_CAP) -> list[frozenset]:
    """All bases in canonical order; all have cardinality M.rank."""
    m = len(M.ground)
    if m > cap:
        raise ResourceLimitError(f"ground set of {m} elements exceeds enumeration cap {cap}")
    if isinstance(M, ExplicitBases):
        return list(M.bases)
    out = []
    for combo in itertools.combinations(M.ground.elements, M.rank):
        S = frozenset(combo)
        if M.is_base_set(S):
            out.append(S)
    return out


def exchange_candidates(M: MatroidOracle, S, S2, e: str) -> list[str]:
    """All f in S2 \\ S whose swap into S \\ {e} lands on a base.

    Nonempty whenever S, S2 are bases and e in S \\ S2 (exchange axiom).
    """
    S, S2 = frozenset(S), frozenset(S2)
    if not is_base(M, S) or not is_base(M, S2):
        raise ContractError("exchange_candidates requires two bases")
    if e not in S - S2:
        raise ContractError(f"element {e!r} not in S \\ S2")
    out = []
    for f in M.ground.sort(S2 - S):
        if M.is_base_set((S - {e}) | {f}):
            out.append(f)
    return out


def simultaneous_exchange(M: MatroidOracle, S, S2, e: str) -> str:
    """Canonically smallest f in S2 \\ S making both one-element swaps bases:
    (S - e) + f and (S2 - f) + e.  Existence is guaranteed for matroids;
    exhaustion signals a broken oracle."""
    S, S2 = frozenset(S), frozenset(S2)
    for f in exchange_candidates(M, S, S2, e):
        if M.is_base_set((S2 - {f}) | {e}):
            return f
    raise AssertionError(
        "no two-sided exchange found; the base family violates the matroid axioms"
    )


def min_weight_base(M: MatroidOracle, weight) -> frozenset:
    """Greedy minimum-total-weight base; ties in the element scan broken by
    canonical order, so the result is deterministic."""
    order = sorted(M.ground.elements, key=lambda e: (weight(e), M.ground.index[e]))
    chosen: set[str] = set()
    for e in order:
        if len(chosen) == M.rank:
            break
        if M.is_independent(frozenset(chosen | {e})):
            chosen.add(e)
    S = frozenset(chosen)
    if not M.is_base_set(S):
        raise AssertionError("greedy did not reach a base; oracle is inconsistent")
    return S


def min_sum_base_minimizes_max(M: MatroidOracle, weight, cap: int = ENUMERATION_CAP) -> bool:
    """Whether the greedy min-sum base also attains the minimum over bases of
    the maximum element weight.  True on every true matroid; exposed as a
    checkable property rather than assumed."""
    S = min_weight_base(M, weight)
    best_max = min(max(weight(e) for e in B) for B in enumerate_bases(M, cap))
    return max(weight(e) for e in S) == best_max


@dataclass(frozen=True)
class AxiomVerdict:
    ok: bool
    reason: str | None = None  # "empty-family" | "unequal-cardinality" | "exchange"
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_base_axioms(family, ground: GroundSet | None = None,
                       cap: int = ENUMERATION_CAP) -> AxiomVerdict:
    """Check that a subset family is the base family of a matroid:
    nonempty, equicardinal, and closed under the one-sided exchange axiom.
    On failure the verdict carries the violating sets (and element)."""
    family = [frozenset(B) for B in family]
    if ground is not None:
        if len(ground) > cap:
            raise ResourceLimitError(f"ground set exceeds verification cap {cap}")
        for B in family:
            ground.check_subset(B)
    if not family:
        return AxiomVerdict(False, "empty-family", ())
    sizes = {len(B) for B in family}
    if len(sizes) != 1:
        small = min(family, key=len)
        big = max(family, key=len)
        return AxiomVerdict(False, "unequal-cardinality", (small, big))
    fam_set = set(family)
    for S in family:
        for S2 in family:
            for e in S - S2:
                if not any((S - {e}) | {f} in fam_set for f in S2 - S):
                    return AxiomVerdict(False, "exchange", (S, S2, e))
    return AxiomVerdict(True)
