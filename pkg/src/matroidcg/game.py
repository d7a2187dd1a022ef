"""Game instances for every cost flavor, profile evaluation, validation.

A GameInstance is immutable after load (internal lazy caches are the only
mutation and are idempotent), so instances are safe to share across
workers.  Player strategy choices and per-resource congestion are value
objects.

Cost channels by flavor:
  classic / weighted          costs[e]                (count / weight-induced)
  player_specific             ps_costs[i][e]          (count)
  set_functional_complementarities
                              costs[e] + aggregator   (any set cost)
  mixed_costs                 lat[e], bot[e] + alphas (count)
  player_specific_mixed       ps_lat[i][e], ps_bot[i][e] + alphas
  mixed_set_functional        lat[e], bot[e] + alphas (any set cost)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .costs import (
    Aggregator,
    CountCost,
    MaxAgg,
    SetCost,
    SumAgg,
    TableAgg,
    TableCost,
    ValueOrder,
    WeightCost,
    check_cost_monotone_wrt_g,
    check_monotone_set_cost,
    check_weak_monotonicity,
    subsets,
)
from .errors import ContractError, NotWeaklyMonotoneError, ResourceLimitError, ValidationError
from .matroid import GroundSet, ExplicitBases, StrategySpace, verify_base_axioms
from .values import Value, value_cmp

PLAYER_CAP = 20
PROFILE_CAP = 10**7


class Flavor(str, Enum):
    CLASSIC = "classic"
    WEIGHTED = "weighted"
    PLAYER_SPECIFIC = "player_specific"
    SET_FUNCTIONAL = "set_functional_complementarities"
    MIXED = "mixed_costs"
    PLAYER_SPECIFIC_MIXED = "player_specific_mixed"
    MIXED_SET_FUNCTIONAL = "mixed_set_functional"


MIXED_FLAVORS = (Flavor.MIXED, Flavor.PLAYER_SPECIFIC_MIXED, Flavor.MIXED_SET_FUNCTIONAL)
PLAYER_SPECIFIC_FLAVORS = (Flavor.PLAYER_SPECIFIC, Flavor.PLAYER_SPECIFIC_MIXED)


@dataclass(frozen=True)
class StrategyProfile:
    """One chosen strategy per player, indexed 0..n-1 for player 1..n."""

    strategies: tuple[frozenset, ...]

    def of(self, i: int) -> frozenset:
        return self.strategies[i - 1]

    def replace(self, i: int, S: frozenset) -> "StrategyProfile":
        out = list(self.strategies)
        out[i - 1] = frozenset(S)
        return StrategyProfile(tuple(out))

    def __iter__(self):
        return iter(self.strategies)


class Congestion:
    """Per-resource user sets as player bitmasks (bit i-1 = player i)."""

    __slots__ = ("masks",)

    def __init__(self, masks: tuple[int, ...]):
        self.masks = masks

    def mask(self, e_idx: int) -> int:
        return self.masks[e_idx]

    def players_on(self, e_idx: int) -> frozenset[int]:
        return set_of_mask(self.masks[e_idx])

    def count(self, e_idx: int) -> int:
        return self.masks[e_idx].bit_count()

    def after_move(self, i: int, old: frozenset, new: frozenset,
                   index: dict[str, int]) -> "Congestion":
        bit = 1 << (i - 1)
        masks = list(self.masks)
        for e in old - new:
            masks[index[e]] &= ~bit
        for e in new - old:
            masks[index[e]] |= bit
        return Congestion(tuple(masks))


def mask_of(players) -> int:
    m = 0
    for i in players:
        m |= 1 << (i - 1)
    return m


def set_of_mask(mask: int) -> frozenset[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


class GameInstance:
    """A congestion game of one of the seven flavors.  Treat as immutable."""

    def __init__(
        self,
        flavor: Flavor,
        resources: GroundSet,
        spaces: list[StrategySpace],
        *,
        weights: list[Fraction] | None = None,
        alphas: list[Fraction] | None = None,
        costs: list[SetCost] | None = None,
        bot_costs: list[SetCost] | None = None,
        ps_costs: list[list[SetCost]] | None = None,
        ps_bot_costs: list[list[SetCost]] | None = None,
        aggregator: Aggregator | None = None,
        meta: dict | None = None,
    ):
        self.flavor = Flavor(flavor)
        self.resources = resources
        self.spaces = tuple(spaces)
        self.n = len(self.spaces)
        self.players = tuple(range(1, self.n + 1))
        self.weights = tuple(Fraction(w) for w in weights) if weights is not None else None
        self.alphas = tuple(Fraction(a) for a in alphas) if alphas is not None else None
        self.costs = tuple(costs) if costs is not None else None
        self.bot_costs = tuple(bot_costs) if bot_costs is not None else None
        self.ps_costs = tuple(tuple(row) for row in ps_costs) if ps_costs is not None else None
        self.ps_bot_costs = (
            tuple(tuple(row) for row in ps_bot_costs) if ps_bot_costs is not None else None
        )
        self.aggregator = aggregator
        self.meta = dict(meta or {})
        self._cache: dict = {}
        self._structure_check()

    # -- construction-time structural requirements (cheap, always on) ------

    def _structure_check(self) -> None:
        m = len(self.resources)
        if self.n < 1:
            raise ContractError("a game needs at least one player")
        if self.n > PLAYER_CAP:
            raise ContractError(f"{self.n} players exceeds the bitmask cap {PLAYER_CAP}")
        for sp in self.spaces:
            if sp.ground != self.resources:
                raise ContractError("strategy space ground set differs from game resources")

        def need(cond: bool, what: str):
            if not cond:
                raise ContractError(f"flavor {self.flavor.value} requires {what}")

        f = self.flavor
        need((self.alphas is not None) == (f in MIXED_FLAVORS), "preference values exactly for mixed flavors")
        if f in (Flavor.CLASSIC, Flavor.WEIGHTED, Flavor.SET_FUNCTIONAL,
                 Flavor.MIXED, Flavor.MIXED_SET_FUNCTIONAL):
            need(self.costs is not None and len(self.costs) == m, "one cost per resource")
        if f == Flavor.WEIGHTED:
            need(self.weights is not None, "player weights")
            need(all(isinstance(c, WeightCost) for c in self.costs), "weight-induced costs")
        if f == Flavor.CLASSIC:
            need(all(isinstance(c, CountCost) for c in self.costs), "count-based costs")
        if f == Flavor.SET_FUNCTIONAL:
            need(self.aggregator is not None, "an aggregation function")
        else:
            need(self.aggregator is None, "no aggregation function")
        if f in (Flavor.MIXED, Flavor.MIXED_SET_FUNCTIONAL):
            need(self.bot_costs is not None and len(self.bot_costs) == m, "bottleneck costs")
            if f == Flavor.MIXED:
                need(all(isinstance(c, CountCost) for c in self.costs + self.bot_costs),
                     "count-based latency and bottleneck costs")
        if f in PLAYER_SPECIFIC_FLAVORS:
            need(self.ps_costs is not None and len(self.ps_costs) == self.n, "per-player costs")
            for row in self.ps_costs:
                need(len(row) == m, "per-player cost rows covering all resources")
                need(all(isinstance(c, CountCost) for c in row), "count-based per-player costs")
        if f == Flavor.PLAYER_SPECIFIC_MIXED:
            need(self.ps_bot_costs is not None and len(self.ps_bot_costs) == self.n,
                 "per-player bottleneck costs")
            for row in self.ps_bot_costs:
                need(len(row) == m and all(isinstance(c, CountCost) for c in row),
                     "count-based per-player bottleneck costs")
        if self.weights is not None:
            need(len(self.weights) == self.n, "one weight per player")
            if any(w < 0 for w in self.weights):
                raise ContractError("player weights must be nonnegative")
        if self.alphas is not None:
            need(len(self.alphas) == self.n, "one preference value per player")
            if any(not 0 <= a <= 1 for a in self.alphas):
                raise ContractError("preference values must lie in [0, 1]")

    # -- channel access -----------------------------------------------------
    # mixed flavors reuse .costs / .ps_costs storage for the latency channel

    def channel(self, tag: str, i: int, e_idx: int) -> SetCost:
        """tag: "c" single channel, "l" latency, "b" bottleneck; i used only
        by player-specific flavors."""
        if tag == "c":
            if self.flavor in PLAYER_SPECIFIC_FLAVORS:
                return self.ps_costs[i - 1][e_idx]
            return self.costs[e_idx]
        if tag == "l":
            if self.flavor == Flavor.PLAYER_SPECIFIC_MIXED:
                return self.ps_costs[i - 1][e_idx]
            return self.costs[e_idx]
        if tag == "b":
            if self.flavor == Flavor.PLAYER_SPECIFIC_MIXED:
                return self.ps_bot_costs[i - 1][e_idx]
            return self.bot_costs[e_idx]
        raise ContractError(f"unknown channel {tag!r}")

    def channel_tags(self) -> tuple[str, ...]:
        return ("l", "b") if self.flavor in MIXED_FLAVORS else ("c",)

    def channel_value(self, tag: str, i: int, e_idx: int, mask: int) -> Fraction:
        """Memoized set-cost evaluation keyed by player bitmask."""
        pskey = i if self.flavor in PLAYER_SPECIFIC_FLAVORS else 0
        key = (tag, pskey, e_idx, mask)
        cache = self._cache.setdefault("vals", {})
        if key not in cache:
            c = self.channel(tag, i, e_idx)
            cache[key] = c.value(set_of_mask(mask), self.weights)
        return cache[key]

    # -- strategy spaces ----------------------------------------------------

    def strategy_list(self, i: int) -> list[frozenset]:
        cache = self._cache.setdefault("strategies", {})
        if i not in cache:
            cache[i] = self.spaces[i - 1].strategies()
        return cache[i]

    def profile_count(self) -> int:
        total = 1
        for i in self.players:
            total *= len(self.strategy_list(i))
        return total

    def all_matroid(self) -> bool:
        return all(sp.is_matroid() for sp in self.spaces)

    def initial_profile(self) -> StrategyProfile:
        return StrategyProfile(tuple(sp.smallest() for sp in self.spaces))

    def support_mask(self, e_idx: int) -> int:
        """Players that can possibly use resource e (superset of any
        achievable user set)."""
        sup = self._cache.get("support")
        if sup is None:
            sup = [0] * len(self.resources)
            for i in self.players:
                for e in self.spaces[i - 1].support():
                    sup[self.resources.index[e]] |= 1 << (i - 1)
            self._cache["support"] = sup
        return sup[e_idx]

    def reachable_values(self, tags: tuple[str, ...] | None = None) -> tuple[Fraction, ...]:
        """All cost values any channel can take at any achievable congestion
        (computed over subsets of each resource's possible user set)."""
        tags = tags or self.channel_tags()
        key = ("reach", tags)
        if key not in self._cache:
            vals: set[Fraction] = set()
            for e_idx in range(len(self.resources)):
                users = set_of_mask(self.support_mask(e_idx))
                if len(users) > 16:
                    raise ResourceLimitError(
                        f"resource with {len(users)} possible users: domain too large")
                for X in subsets(users):
                    mask = mask_of(X)
                    for tag in tags:
                        players = self.players if self.flavor in PLAYER_SPECIFIC_FLAVORS else (1,)
                        for i in players:
                            vals.add(self.channel_value(tag, i, e_idx, mask))
            self._cache[key] = tuple(sorted(vals))
        return self._cache[key]

    def value_order(self) -> ValueOrder:
        """Preorder ranks of the reachable cost values under the aggregator;
        only defined for the complementarities flavor."""
        if self.flavor != Flavor.SET_FUNCTIONAL:
            raise ContractError("value order requires the complementarities flavor")
        if "order" not in self._cache:
            self._cache["order"] = ValueOrder(self.aggregator, self.reachable_values())
        return self._cache["order"]

    # -- cost evaluation ----------------------------------------------------

    def gamma_key(self, cong: Congestion, i: int, S_i: frozenset) -> Value:
        """Comparison key of player i's cost (order-isomorphic to the cost)."""
        idx = self.resources.index
        f = self.flavor
        if f in (Flavor.CLASSIC, Flavor.WEIGHTED, Flavor.PLAYER_SPECIFIC):
            return sum(
                (self.channel_value("c", i, idx[e], cong.mask(idx[e])) for e in S_i),
                Fraction(0),
            )
        if f == Flavor.SET_FUNCTIONAL:
            vs = [self.channel_value("c", i, idx[e], cong.mask(idx[e])) for e in S_i]
            return self.aggregator.key(vs)
        # mixed flavors
        a = self.alphas[i - 1]
        tot = sum(
            (self.channel_value("l", i, idx[e], cong.mask(idx[e])) for e in S_i),
            Fraction(0),
        )
        worst = max(
            (self.channel_value("b", i, idx[e], cong.mask(idx[e])) for e in S_i),
            default=Fraction(0),
        )
        return a * tot + (1 - a) * worst

    def gamma_value(self, cong: Congestion, i: int, S_i: frozenset) -> Value:
        """Displayed cost of player i (may differ from the key for L^p)."""
        if self.flavor == Flavor.SET_FUNCTIONAL:
            idx = self.resources.index
            vs = [self.channel_value("c", i, idx[e], cong.mask(idx[e])) for e in S_i]
            return self.aggregator.value(vs)
        return self.gamma_key(cong, i, S_i)


def congestion_of(game: GameInstance, S: StrategyProfile) -> Congestion:
    """Per-resource user sets of a profile; rejects invalid strategies."""
    if len(S.strategies) != game.n:
        raise ContractError("profile size differs from player count")
    masks = [0] * len(game.resources)
    for i in game.players:
        S_i = S.of(i)
        if not game.spaces[i - 1].contains(S_i):
            raise ContractError(f"player {i} strategy {sorted(S_i)} not in her space")
        bit = 1 << (i - 1)
        for e in S_i:
            masks[game.resources.index[e]] |= bit
    return Congestion(tuple(masks))


def player_cost(game: GameInstance, S: StrategyProfile, i: int) -> Value:
    """The cost imposed on player i in profile S, per the flavor formula."""
    cong = congestion_of(game, S)
    return game.gamma_value(cong, i, S.of(i))


def all_profiles(game: GameInstance, cap: int = PROFILE_CAP):
    """Iterate all strategy profiles in canonical order (player 1 outermost)."""
    total = game.profile_count()
    if total > cap:
        raise ResourceLimitError(f"{total} profiles exceed the cap {cap}")
    lists = [game.strategy_list(i) for i in game.players]
    for combo in itertools.product(*lists):
        yield StrategyProfile(tuple(combo))


# ---------------------------------------------------------------------------
# load-time validation and conformance certification


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""
    hard: bool = True  # hard failures make the instance unloadable


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]
    conforming: bool
    guarantee: str  # which existence guarantee applies, or why none

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks if c.hard)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]


def _fmt_sets(w) -> str:
    def one(x):
        if isinstance(x, frozenset):
            return "{" + ",".join(str(v) for v in sorted(x)) + "}"
        return str(x)

    return "(" + ", ".join(one(x) for x in w) + ")"


def _global_rank(game: GameInstance) -> int | None:
    sizes = set()
    for i in game.players:
        for S in game.strategy_list(i):
            sizes.add(len(S))
    return sizes.pop() if len(sizes) == 1 else None


def validate_game(game: GameInstance) -> ValidationReport:
    """Run every load-time check and the theorem-assumption certification.

    Hard checks (explicit base families are matroids, cost monotonicity,
    table totality, cardinality for fixed-arity aggregation) make a game
    unloadable when they fail.  Soft checks (matroid spaces everywhere,
    weak monotonicity of the aggregator on the reachable value domain,
    cost monotonicity with respect to it, monotone dependence) decide
    whether any existence guarantee is certified.
    """
    checks: list[CheckResult] = []

    def add(name, ok, detail="", hard=True):
        checks.append(CheckResult(name, ok, detail, hard))
        return ok

    # explicit base families must actually be matroids
    for i in game.players:
        sp = game.spaces[i - 1]
        if isinstance(sp, ExplicitBases):
            verdict = verify_base_axioms(sp.bases, game.resources)
            add(
                f"matroid-axioms player {i}",
                verdict.ok,
                "" if verdict.ok else f"{verdict.reason} witness {_fmt_sets(verdict.witness)}",
            )

    # cost channels: totality + plain monotonicity
    n = game.n
    for tag in game.channel_tags():
        players = game.players if game.flavor in PLAYER_SPECIFIC_FLAVORS else (1,)
        for i in players:
            for e_idx, e in enumerate(game.resources):
                c = game.channel(tag, i, e_idx)
                label = {"c": "cost", "l": "latency", "b": "bottleneck"}[tag]
                who = f" player {i}" if game.flavor in PLAYER_SPECIFIC_FLAVORS else ""
                if isinstance(c, TableCost):
                    missing = [X for X in subsets(game.players) if X not in c.entries]
                    if not add(f"{label} table totality {e}{who}", not missing,
                               "" if not missing else f"missing subset {_fmt_sets(missing[:1])}"):
                        continue
                if isinstance(c, CountCost) and hasattr(c.fn, "values") and len(c.fn.values) <= n:
                    add(f"{label} table coverage {e}{who}", False,
                        f"count table of size {len(c.fn.values)} cannot serve {n} players")
                    continue
                if isinstance(c, WeightCost) and c.weights is None and game.weights is None:
                    add(f"{label} weights {e}{who}", False, "weight-induced cost without weights")
                    continue
                verdict = check_monotone_set_cost(c, n, game.weights)
                add(f"{label} monotone {e}{who}", verdict.ok,
                    "" if verdict.ok else f"covering pair {_fmt_sets(verdict.witness)}")

    hard_ok = all(c.ok for c in checks)

    # cardinality-r for the complementarities flavor
    rank = _global_rank(game)
    if game.flavor == Flavor.SET_FUNCTIONAL:
        g = game.aggregator
        fixed_r = g.r is not None or isinstance(g, TableAgg)
        needs_global = fixed_r or g.kind != "sum"
        if needs_global:
            ok = rank is not None and (g.r is None or g.r == rank)
            if rank is None:
                detail = "strategies of differing cardinality"
            elif g.r is not None and g.r != rank:
                detail = f"aggregator arity {g.r} but strategies of size {rank}"
            else:
                detail = ""
            add("cardinality-r", ok, detail)
            hard_ok = hard_ok and ok
        if hard_ok and isinstance(g, TableAgg):
            try:
                reach = game.reachable_values()
                off_grid = [v for v in reach if v not in set(g.grid)]
            except ResourceLimitError:
                off_grid = []
            ok = add("aggregator grid coverage", not off_grid,
                     "" if not off_grid else f"cost value {off_grid[0]} not on the grid")
            hard_ok = hard_ok and ok

    # conformance: which existence guarantee applies
    matroid = game.all_matroid()
    add("matroid strategy spaces", matroid, "" if matroid else "explicit strategy list present", hard=False)
    conforming = False
    guarantee = "none"
    if hard_ok:
        conforming, guarantee = _certify(game, checks, add, matroid)
    return ValidationReport(tuple(checks), conforming and hard_ok, guarantee)


def _certify(game: GameInstance, checks, add, matroid: bool) -> tuple[bool, str]:
    f = game.flavor
    if f == Flavor.CLASSIC:
        return True, "classic congestion game (exact potential)"
    if f == Flavor.WEIGHTED:
        return matroid, "weighted matroid congestion game" if matroid else "weighted non-matroid: no guarantee"
    if f == Flavor.PLAYER_SPECIFIC:
        return matroid, "player-specific matroid congestion game" if matroid else "player-specific non-matroid: no guarantee"
    if f == Flavor.SET_FUNCTIONAL:
        try:
            domain = game.reachable_values()
            wm = check_weak_monotonicity(game.aggregator, domain)
        except NotWeaklyMonotoneError as exc:
            wm = None
            add("aggregator weakly monotone", False, str(exc), hard=False)
        except ResourceLimitError as exc:
            add("aggregator weakly monotone", False, f"domain too large: {exc}", hard=False)
            return False, "uncertified: reachable domain too large"
        if wm is not None:
            add("aggregator weakly monotone", wm.ok,
                "" if wm.ok else f"witness {_fmt_sets(wm.witness[:4])}", hard=False)
        if wm is None or not wm.ok:
            return False, "aggregator not weakly monotone on reachable domain"
        costs_ok = True
        for e_idx, e in enumerate(game.resources):
            verdict = check_cost_monotone_wrt_g(
                game.costs[e_idx], game.aggregator, game.n, domain, game.weights
            )
            if not verdict.ok:
                add(f"cost monotone wrt g {e}", False, f"covering pair {_fmt_sets(verdict.witness)}", hard=False)
                costs_ok = False
        add("costs monotone wrt aggregator", costs_ok, "", hard=False)
        if matroid and costs_ok:
            qualifier = " (certified on reachable domain)" if isinstance(game.aggregator, TableAgg) else ""
            return True, "matroid game with weakly monotone aggregation" + qualifier
        return False, "no guarantee: " + ("cost order violates preorder" if not costs_ok else "non-matroid spaces")
    # mixed flavors
    singleton = all(len(S) == 1 for i in game.players for S in game.strategy_list(i))
    alpha01 = all(a in (0, 1) for a in game.alphas)
    if f in (Flavor.MIXED, Flavor.PLAYER_SPECIFIC_MIXED):
        if singleton:
            return True, "mixed costs on singleton strategies"
        if matroid and alpha01:
            return True, "mixed costs on matroids with 0/1 preferences"
    if f in (Flavor.MIXED, Flavor.MIXED_SET_FUNCTIONAL):
        dep = check_monotone_dependence(game)
        add("monotone dependence", dep.ok,
            "" if dep.ok else dep.detail, hard=False)
        if matroid and dep.ok:
            return True, "mixed costs on matroids with monotone dependence"
    return False, "mixed costs outside every proven case: no guarantee"


@dataclass(frozen=True)
class DependenceVerdict:
    ok: bool
    d_table: dict | None = None  # latency value -> bottleneck value
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_monotone_dependence(game: GameInstance) -> DependenceVerdict:
    """Infer the shared map d with b_e = d(l_e) pointwise over achievable
    congestions, and check d is nondecreasing; otherwise explain why not."""
    if game.flavor not in (Flavor.MIXED, Flavor.MIXED_SET_FUNCTIONAL):
        raise ContractError("monotone dependence is defined for shared-channel mixed flavors")
    d: dict[Fraction, Fraction] = {}
    for e_idx, e in enumerate(game.resources):
        users = set_of_mask(game.support_mask(e_idx))
        for X in subsets(users):
            mask = mask_of(X)
            lv = game.channel_value("l", 1, e_idx, mask)
            bv = game.channel_value("b", 1, e_idx, mask)
            if lv in d and d[lv] != bv:
                return DependenceVerdict(
                    False, None,
                    f"resource {e}: latency {lv} maps to both {d[lv]} and {bv}")
            d[lv] = bv
    pts = sorted(d.items())
    for (l1, b1), (l2, b2) in zip(pts, pts[1:]):
        if b1 > b2:
            return DependenceVerdict(
                False, None, f"dependence not monotone: d({l1})={b1} > d({l2})={b2}")
    return DependenceVerdict(True, d)


def load_checked(game: GameInstance) -> GameInstance:
    """Validate and return the game; raise ValidationError on hard failures."""
    report = validate_game(game)
    if not report.ok:
        first = next(c for c in report.checks if c.hard and not c.ok)
        raise ValidationError(f"{first.name}: {first.detail or 'failed'}", witness=first)
    return game
