"""Seeded random instance generation.

Everything is drawn from a single random.Random(seed) in a fixed order,
so a seed fully determines the instance (and therefore the serialized
file, byte for byte).  Generated costs are monotone by construction:
count tables accumulate nonnegative increments, subset tables take the
max over covered subsets plus an increment, and table aggregators get the
same treatment over sorted grid tuples, which keeps them coordinate
monotone (hence weakly monotone) on their grid.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .costs import (
    CountCost,
    LpAgg,
    MaxAgg,
    PolyFn,
    StepFn,
    SumAgg,
    TableAgg,
    TableCost,
    TableFn,
    WeightCost,
    subsets,
)
from .errors import ContractError
from .game import Flavor, GameInstance, load_checked
from .matroid import (
    ExplicitBases,
    ExplicitStrategies,
    GraphicMatroid,
    GroundSet,
    PartitionMatroid,
    UniformMatroid,
    enumerate_bases,
)

MATROID_KINDS = ("uniform", "partition", "graphic", "explicit")
INCREMENTS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(1), Fraction(2), Fraction(3))


@dataclass(frozen=True)
class GenSpec:
    """Knobs of one generated instance; the seed pins every choice."""

    flavor: Flavor
    n: int
    m: int
    seed: int
    matroid_kinds: tuple[str, ...] = MATROID_KINDS
    cost_family: str = "count"  # count | weight | table | mix
    aggregator: str | None = None  # sum | max | lp | table (set-functional only)
    p: int = 2
    equal_rank: bool = False  # force one strategy cardinality across players
    alpha_mode: str = "free"  # free | zero-one
    dependence: bool = False  # bottleneck = d(latency) for a monotone d
    singleton: bool = False
    space_kind: str | None = None  # force one space kind (e.g. "strategies")

    def __post_init__(self):
        if not (1 <= self.n <= 12 and 1 <= self.m <= 20):
            raise ContractError("generator supports 1..12 players and 1..20 resources")


def generate(spec: GenSpec) -> GameInstance:
    """Build and validate the instance a spec describes."""
    rng = random.Random(spec.seed)
    resources = GroundSet(tuple(f"e{k}" for k in range(1, spec.m + 1)))

    needs_weights = spec.flavor == Flavor.WEIGHTED or (
        spec.cost_family in ("weight", "mix")
        and spec.flavor in (Flavor.SET_FUNCTIONAL, Flavor.MIXED_SET_FUNCTIONAL))
    weights = [_rational(rng, 0, 6) for _ in range(spec.n)] if needs_weights else None

    agg = None
    grid = None
    rank_forced = None
    if spec.flavor == Flavor.SET_FUNCTIONAL:
        kind = spec.aggregator or rng.choice(("sum", "max", "lp"))
        if kind == "table":
            grid = _grid(rng)
        if kind != "sum" or spec.equal_rank:
            rank_forced = rng.randint(1, max(1, min(3, spec.m - 1)))
        agg = _gen_aggregator(rng, kind, rank_forced, grid, spec.p)
    elif spec.equal_rank:
        rank_forced = rng.randint(1, max(1, min(3, spec.m - 1)))
    if spec.singleton:
        rank_forced = 1

    spaces = [
        _gen_space(rng, resources, spec, rank_forced)
        for _ in range(spec.n)
    ]

    kwargs: dict = {}
    if spec.flavor in (Flavor.CLASSIC, Flavor.WEIGHTED, Flavor.SET_FUNCTIONAL):
        kwargs["costs"] = [
            _gen_cost(rng, spec, resources, weights, grid) for _ in range(spec.m)
        ]
    elif spec.flavor == Flavor.PLAYER_SPECIFIC:
        kwargs["ps_costs"] = [
            [_gen_count_cost(rng, spec.n, None) for _ in range(spec.m)]
            for _ in range(spec.n)
        ]
    elif spec.flavor in (Flavor.MIXED, Flavor.MIXED_SET_FUNCTIONAL):
        lat = [_gen_cost(rng, spec, resources, weights, grid) for _ in range(spec.m)]
        if spec.dependence:
            bot = _apply_dependence(rng, lat, spec.n, weights)
        else:
            bot = [_gen_cost(rng, spec, resources, weights, grid) for _ in range(spec.m)]
        kwargs["costs"], kwargs["bot_costs"] = lat, bot
    elif spec.flavor == Flavor.PLAYER_SPECIFIC_MIXED:
        kwargs["ps_costs"] = [
            [_gen_count_cost(rng, spec.n, None) for _ in range(spec.m)] for _ in range(spec.n)
        ]
        kwargs["ps_bot_costs"] = [
            [_gen_count_cost(rng, spec.n, None) for _ in range(spec.m)] for _ in range(spec.n)
        ]

    alphas = None
    if spec.flavor in (Flavor.MIXED, Flavor.PLAYER_SPECIFIC_MIXED, Flavor.MIXED_SET_FUNCTIONAL):
        if spec.alpha_mode == "zero-one":
            alphas = [Fraction(rng.randint(0, 1)) for _ in range(spec.n)]
        else:
            alphas = [Fraction(rng.randint(0, 4), 4) for _ in range(spec.n)]

    game = GameInstance(
        spec.flavor,
        resources,
        spaces,
        weights=weights,
        alphas=alphas,
        aggregator=agg,
        meta={"seed": str(spec.seed)},
        **kwargs,
    )
    return load_checked(game)


def generate_text(spec: GenSpec) -> str:
    from .fileformat import serialize_game

    return serialize_game(generate(spec))


# ---------------------------------------------------------------------------
# pieces


def _rational(rng, lo: int, hi: int) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.choice((1, 1, 2, 4)))


def _grid(rng) -> tuple[Fraction, ...]:
    pool = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2),
            Fraction(3), Fraction(4)]
    size = rng.randint(3, 4)
    return tuple(sorted(rng.sample(pool, size)))


def _monotone_sequence(rng, length: int, grid=None) -> tuple[Fraction, ...]:
    if grid is not None:
        idx = rng.randrange(len(grid))
        out = [grid[idx]]
        for _ in range(length - 1):
            idx = min(len(grid) - 1, idx + rng.choice((0, 0, 1, 1, 2)))
            out.append(grid[idx])
        return tuple(out)
    v = _rational(rng, 0, 3)
    out = [v]
    for _ in range(length - 1):
        v = v + rng.choice(INCREMENTS)
        out.append(v)
    return tuple(out)


def _gen_count_cost(rng, n: int, grid) -> CountCost:
    return CountCost(TableFn(_monotone_sequence(rng, n + 1, grid)))


def _gen_table_cost(rng, n: int, grid) -> TableCost:
    """Monotone random subset table: max over covered subsets + increment."""
    entries: dict = {}
    for X in subsets(range(1, n + 1)):
        below = [entries[X - {j}] for j in X]
        floor = max(below, default=None)
        if grid is not None:
            if floor is None:
                entries[X] = grid[rng.randrange(len(grid))]
            else:
                fi = grid.index(floor)
                entries[X] = grid[min(len(grid) - 1, fi + rng.choice((0, 0, 1, 2)))]
        else:
            base = floor if floor is not None else _rational(rng, 0, 2)
            entries[X] = base + (rng.choice(INCREMENTS) if floor is not None else Fraction(0))
    return TableCost(entries)


def _gen_weight_cost(rng) -> WeightCost:
    if rng.random() < 0.5:
        coeffs = tuple(_rational(rng, 0, 3) for _ in range(rng.randint(1, 3)))
        return WeightCost(PolyFn(coeffs))
    k = rng.randint(2, 4)
    thresholds = [Fraction(0)]
    t = Fraction(0)
    for _ in range(k - 1):
        t = t + Fraction(rng.randint(1, 4), rng.choice((1, 2)))
        thresholds.append(t)
    levels = _monotone_sequence(rng, k)
    return WeightCost(StepFn(tuple(thresholds), levels))


def _gen_cost(rng, spec: GenSpec, resources, weights, grid):
    family = spec.cost_family
    if family == "mix":
        choices = ["count", "table"] + (["weight"] if weights is not None else [])
        family = rng.choice(choices)
    if spec.flavor in (Flavor.CLASSIC, Flavor.MIXED) or family == "count":
        return _gen_count_cost(rng, spec.n, grid)
    if spec.flavor == Flavor.WEIGHTED or family == "weight":
        if grid is not None:
            return _gen_count_cost(rng, spec.n, grid)  # grids pair with exact tables
        return _gen_weight_cost(rng)
    return _gen_table_cost(rng, spec.n, grid)


def _apply_dependence(rng, lat, n: int, weights):
    """Derive bottleneck channels as d(latency) for one random monotone d."""
    values = set()
    for c in lat:
        for X in subsets(range(1, n + 1)):
            values.add(c.value(X, weights))
    d: dict[Fraction, Fraction] = {}
    out = Fraction(rng.randint(0, 2))
    for v in sorted(values):
        d[v] = out
        out = out + rng.choice(INCREMENTS)
    bot = []
    for c in lat:
        entries = {X: d[c.value(X, weights)] for X in subsets(range(1, n + 1))}
        if isinstance(c, CountCost):
            bot.append(CountCost(TableFn(tuple(
                d[c.value(frozenset(range(1, k + 1)), weights)] for k in range(n + 1)))))
        else:
            bot.append(TableCost(entries))
    return bot


def _gen_aggregator(rng, kind: str, r: int | None, grid, p: int):
    if kind == "sum":
        return SumAgg()
    if kind == "max":
        return MaxAgg()
    if kind == "lp":
        return LpAgg(Fraction(p))
    if kind != "table":
        raise ContractError(f"unknown aggregator kind {kind!r}")
    # monotone closure over sorted index tuples keeps the table
    # coordinate-monotone on the grid, hence weakly monotone
    by_idx: dict[tuple, Fraction] = {}
    entries: dict[tuple, Fraction] = {}
    for tup in itertools.combinations_with_replacement(range(len(grid)), r):
        preds = [tuple(sorted(tup[:j] + (tup[j] - 1,) + tup[j + 1:]))
                 for j in range(r) if tup[j] > 0]
        if preds:
            val = max(by_idx[q] for q in preds) + rng.choice(INCREMENTS)
        else:
            val = Fraction(rng.randint(0, 2))
        by_idx[tup] = val
        entries[tuple(grid[t] for t in tup)] = val
    return TableAgg(grid, entries, r)


def _gen_space(rng, resources: GroundSet, spec: GenSpec, rank: int | None):
    kind = spec.space_kind or rng.choice(spec.matroid_kinds)
    if spec.singleton and kind not in ("uniform", "explicit"):
        kind = "uniform"
    m = len(resources)
    if kind == "strategies":
        pool = subsets(resources.elements)[1:]  # nonempty subsets
        count = rng.randint(2, min(5, len(pool)))
        return ExplicitStrategies(resources, rng.sample(pool, count))
    if kind == "explicit":
        base_kind = rng.choice(tuple(k for k in spec.matroid_kinds if k != "explicit") or ("uniform",))
        if spec.singleton:
            elems = rng.sample(resources.elements, rng.randint(1, m))
            return ExplicitBases(resources, [frozenset({e}) for e in elems])
        oracle = _gen_matroid(rng, resources, base_kind, rank)
        return ExplicitBases(resources, enumerate_bases(oracle))
    return _gen_matroid(rng, resources, kind, rank)


def _gen_matroid(rng, resources: GroundSet, kind: str, rank: int | None):
    m = len(resources)
    if kind == "uniform":
        r = rank if rank is not None else rng.randint(1, max(1, min(3, m - 1)))
        return UniformMatroid(resources, min(r, m))
    if kind == "partition":
        elems = list(resources.elements)
        rng.shuffle(elems)
        nblocks = rng.randint(1, min(3, m))
        cuts = sorted(rng.sample(range(1, m), nblocks - 1)) if nblocks > 1 else []
        blocks = []
        prev = 0
        for cut in cuts + [m]:
            blocks.append(frozenset(elems[prev:cut]))
            prev = cut
        sizes = [len(b) for b in blocks]
        total = rank if rank is not None else rng.randint(1, min(sum(sizes), 4))
        total = min(total, sum(sizes))
        caps = [0] * len(blocks)
        remaining = total
        for j in range(len(blocks)):  # one random pass, then a deterministic top-up
            take = rng.randint(0, min(sizes[j], remaining))
            caps[j] = take
            remaining -= take
        for j in range(len(blocks)):
            add = min(sizes[j] - caps[j], remaining)
            caps[j] += add
            remaining -= add
        return PartitionMatroid(resources, list(zip(blocks, caps)))
    if kind == "graphic":
        r = rank if rank is not None else rng.randint(1, max(1, min(3, m - 1)))
        r = min(r, m)
        verts = [f"v{k}" for k in range(r + 1)]
        elems = list(resources.elements)
        rng.shuffle(elems)
        edges = {}
        for k in range(r):  # spanning tree first
            u = verts[k + 1]
            v = verts[rng.randint(0, k)]
            edges[elems[k]] = (u, v)
        for e in elems[r:]:
            u, v = rng.sample(verts, 2) if len(verts) > 1 else (verts[0], verts[0])
            edges[e] = (u, v)
        if len(verts) == 1:  # rank 0 would need self-loops; fall back
            return UniformMatroid(resources, 1)
        return GraphicMatroid(resources, edges)
    raise ContractError(f"unknown matroid kind {kind!r}")
