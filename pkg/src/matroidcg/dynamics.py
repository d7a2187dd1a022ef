"""Improving-move search, the lexicographic potential, and equilibrium
oracles.

The potential of a profile is the multiset of per-resource pairs
(cost value, user count), sorted nonincreasing under the pair order:
first by the preorder rank of the cost under the aggregation function,
then by the count.  Every improving local move in a conforming game
strictly decreases it lexicographically, which is what the convergence
loop asserts step by step.

Comparisons of player costs go through order-isomorphic keys (see
costs.Aggregator.key), so strictness is exact wherever the arithmetic is
rational and tolerance-guarded where it is not.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction

from . import backend
from .errors import ContractError, ResourceLimitError
from .game import (
    Congestion,
    Flavor,
    GameInstance,
    StrategyProfile,
    congestion_of,
    validate_game,
)
from .matroid import min_weight_base
from .values import Value, format_value, value_lt

STEP_CAP = 10**6
BR_ITERATION_CAP = 10**4
PROFILE_CAP = 10**7


# ---------------------------------------------------------------------------
# potential


@dataclass(frozen=True)
class PhiEntry:
    resource: str
    cost: Fraction
    count: int
    rank: int  # preorder class of the cost value among reachable values

    @property
    def pair_key(self) -> tuple[int, int]:
        return (self.rank, self.count)


@dataclass(frozen=True)
class Potential:
    """Per-resource entries sorted lexicographically nonincreasing."""

    entries: tuple[PhiEntry, ...]

    def key(self) -> tuple[tuple[int, int], ...]:
        return tuple(e.pair_key for e in self.entries)

    def serialize(self) -> str:
        return ";".join(f"{format_value(e.cost)}:{e.count}" for e in self.entries)


def potential(game: GameInstance, S: StrategyProfile | Congestion) -> Potential:
    """The sorted potential of a profile.  Requires the complementarities
    flavor with an aggregator whose preorder exists on the reachable
    values (raises NotWeaklyMonotoneError otherwise)."""
    if game.flavor != Flavor.SET_FUNCTIONAL:
        raise ContractError("the potential is defined for the complementarities flavor")
    cong = S if isinstance(S, Congestion) else congestion_of(game, S)
    order = game.value_order()
    entries = []
    for e_idx, e in enumerate(game.resources):
        c = game.channel_value("c", 1, e_idx, cong.mask(e_idx))
        entries.append(PhiEntry(e, c, cong.count(e_idx), order.rank_of(c)))
    entries.sort(key=lambda E: (-E.rank, -E.count, game.resources.index[E.resource]))
    return Potential(tuple(entries))


def potential_compare(P1: Potential, P2: Potential) -> str:
    """"less" | "equal" | "greater" in the lexicographic order; the first
    position whose pairs are not equivalent decides."""
    if len(P1.entries) != len(P2.entries):
        raise ContractError("potentials of different games are not comparable")
    k1, k2 = P1.key(), P2.key()
    if k1 < k2:
        return "less"
    return "greater" if k1 > k2 else "equal"


# ---------------------------------------------------------------------------
# equilibria and improving moves


@dataclass(frozen=True)
class PNEVerdict:
    is_pne: bool
    witness: tuple | None = None  # (player, better strategy)
    witness_costs: tuple | None = None  # (current, deviated)

    def __bool__(self) -> bool:
        return self.is_pne


def is_pne(game: GameInstance, S: StrategyProfile, tol: float | None = None) -> PNEVerdict:
    """No player has a strictly improving unilateral deviation; otherwise
    the canonically first witness."""
    cong = congestion_of(game, S)
    for i in game.players:
        S_i = S.of(i)
        cur = game.gamma_key(cong, i, S_i)
        for alt in game.strategy_list(i):
            if alt == S_i:
                continue
            cong2 = cong.after_move(i, S_i, alt, game.resources.index)
            k2 = game.gamma_key(cong2, i, alt)
            if _lt(k2, cur, tol):
                return PNEVerdict(
                    False, (i, alt),
                    (game.gamma_value(cong, i, S_i), game.gamma_value(cong2, i, alt)))
    return PNEVerdict(True)


def _lt(a: Value, b: Value, tol: float | None) -> bool:
    return value_lt(a, b) if tol is None else value_lt(a, b, tol)


def improving_local_move(game: GameInstance, S: StrategyProfile, i: int,
                         tol: float | None = None) -> tuple[str, str] | None:
    """First strictly improving single swap (e_out, f_in) of player i, in
    canonical scan order, or None."""
    cong = congestion_of(game, S)
    return _improving_local_move(game, cong, S.of(i), i, tol)


def _improving_local_move(game, cong, S_i, i, tol):
    space = game.spaces[i - 1]
    cur = game.gamma_key(cong, i, S_i)
    for e_out in game.resources.sort(S_i):
        for f_in in game.resources.elements:
            if f_in in S_i:
                continue
            alt = (S_i - {e_out}) | {f_in}
            if not space.contains(alt):
                continue
            cong2 = cong.after_move(i, S_i, alt, game.resources.index)
            if _lt(game.gamma_key(cong2, i, alt), cur, tol):
                return (e_out, f_in)
    return None


# ---------------------------------------------------------------------------
# the convergence loop


@dataclass(frozen=True)
class TraceStep:
    step: int
    player: int
    removed: str
    added: str
    gamma_before: Value
    gamma_after: Value
    potential: Potential | None


@dataclass
class DynamicsTrace:
    steps: list[TraceStep] = field(default_factory=list)
    terminal: str = "pne"  # pne | cap_reached | cycle_detected | local_stable_not_pne
    final_profile: StrategyProfile | None = None
    initial_potential: Potential | None = None
    certified: bool = False  # convergence guarantee applied to this run
    guarantee: str = ""
    cycle: list[StrategyProfile] | None = None

    def potentials(self) -> list[Potential]:
        out = [] if self.initial_potential is None else [self.initial_potential]
        out.extend(s.potential for s in self.steps if s.potential is not None)
        return out


def run_local_move_dynamics(game: GameInstance, init: StrategyProfile | None = None,
                            cap: int = STEP_CAP, tol: float | None = None) -> DynamicsTrace:
    """Round-robin improving-local-move dynamics from ``init`` (default:
    each player's canonically smallest strategy).

    On conforming complementarities games the potential strictly decreases
    every step and the loop provably terminates in a pure Nash equilibrium.
    Non-conforming games still run, uncertified: profiles are watched for
    repeats and a detected cycle aborts the run with the cycle as evidence.
    """
    if cap < 1:
        raise ContractError("step cap must be at least 1")
    report = validate_game(game)
    certified = report.conforming and game.flavor in (
        Flavor.CLASSIC, Flavor.WEIGHTED, Flavor.SET_FUNCTIONAL)
    profile = init if init is not None else game.initial_profile()
    cong = congestion_of(game, profile)  # also validates the profile

    track_potential = False
    if game.flavor == Flavor.SET_FUNCTIONAL:
        try:
            game.value_order()
            track_potential = True
        except Exception:
            track_potential = False

    trace = DynamicsTrace(certified=certified, guarantee=report.guarantee)
    if track_potential:
        trace.initial_potential = potential(game, cong)

    seen: dict[StrategyProfile, int] = {profile: 0}
    order: list[StrategyProfile] = [profile]
    steps = 0
    quiet = 0
    turn = 0
    while quiet < game.n:
        i = game.players[turn % game.n]
        turn += 1
        S_i = profile.of(i)
        move = _improving_local_move(game, cong, S_i, i, tol)
        if move is None:
            quiet += 1
            continue
        quiet = 0
        e_out, f_in = move
        alt = (S_i - {e_out}) | {f_in}
        before = game.gamma_value(cong, i, S_i)
        cong = cong.after_move(i, S_i, alt, game.resources.index)
        profile = profile.replace(i, alt)
        after = game.gamma_value(cong, i, alt)
        steps += 1
        phi = potential(game, cong) if track_potential else None
        trace.steps.append(TraceStep(steps, i, e_out, f_in, before, after, phi))
        if steps >= cap:
            trace.terminal = "cap_reached"
            trace.final_profile = profile
            return trace
        if not certified:
            if profile in seen:
                trace.terminal = "cycle_detected"
                trace.cycle = order[seen[profile]:] + [profile]
                trace.final_profile = profile
                return trace
            seen[profile] = len(order)
            order.append(profile)

    verdict = is_pne(game, profile, tol)
    trace.terminal = "pne" if verdict.is_pne else "local_stable_not_pne"
    trace.final_profile = profile
    return trace


def write_trace_csv(trace: DynamicsTrace, fh) -> None:
    """Trace schema: step,player,removed,added,gamma_before,gamma_after,
    potential — then one machine-readable terminal row."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["step", "player", "removed", "added", "gamma_before", "gamma_after", "potential"])
    for s in trace.steps:
        w.writerow([
            s.step, s.player, s.removed, s.added,
            format_value(s.gamma_before), format_value(s.gamma_after),
            s.potential.serialize() if s.potential is not None else "",
        ])
    w.writerow(["terminal", trace.terminal, "", "", "", "", ""])


# ---------------------------------------------------------------------------
# brute-force oracles


def brute_force_pne(game: GameInstance, cap: int = PROFILE_CAP,
                    tol: float | None = None) -> list[StrategyProfile]:
    """Exactly the profiles that pass is_pne, in canonical profile order.

    Runs on the compiled sweep kernel when the game packs into exact
    integer tables, otherwise on the object evaluator; both produce the
    identical list.
    """
    total = game.profile_count()
    if total > cap:
        raise ResourceLimitError(f"{total} profiles exceed the cap {cap}")
    return backend.sweep_pne(game, tol)


def best_response(game: GameInstance, S: StrategyProfile, i: int,
                  tol: float | None = None) -> frozenset:
    """A cost-minimizing strategy of player i against S_{-i}: greedy on the
    matroid for sum-form costs, enumeration argmin otherwise (canonical
    tie-break)."""
    cong0 = congestion_of(game, S)
    cong = cong0.after_move(i, S.of(i), frozenset(), game.resources.index)
    sum_form = game.flavor in (Flavor.CLASSIC, Flavor.WEIGHTED, Flavor.PLAYER_SPECIFIC) or (
        game.flavor == Flavor.SET_FUNCTIONAL and game.aggregator.kind == "sum")
    space = game.spaces[i - 1]
    if sum_form and space.is_matroid():
        bit = 1 << (i - 1)
        idx = game.resources.index

        def marginal(e: str) -> Fraction:
            return game.channel_value("c", i, idx[e], cong.mask(idx[e]) | bit)

        return min_weight_base(space, marginal)
    best = None
    best_key = None
    for alt in game.strategy_list(i):
        cong2 = cong.after_move(i, frozenset(), alt, game.resources.index)
        k = game.gamma_key(cong2, i, alt)
        if best_key is None or _lt(k, best_key, tol):
            best, best_key = alt, k
    return best


@dataclass(frozen=True)
class SolverResult:
    profile: StrategyProfile
    method: str  # "best-response" | "exhaustive"
    steps: int


def player_specific_solver(game: GameInstance, cap: int = BR_ITERATION_CAP) -> SolverResult:
    """A verified pure Nash equilibrium of a player-specific matroid game.

    Best-response iteration with full-history cycle detection first; on a
    cycle or cap, exhaustive enumeration (existence is theorem-backed, the
    literature gives no constructive local dynamics for this model)."""
    if game.flavor != Flavor.PLAYER_SPECIFIC:
        raise ContractError("solver expects the player-specific flavor")
    profile = game.initial_profile()
    seen = {profile}
    steps = 0
    stable = False
    while steps < cap:
        moved = False
        for i in game.players:
            br = best_response(game, profile, i)
            if br == profile.of(i):
                continue
            cong = congestion_of(game, profile)
            cur = game.gamma_key(cong, i, profile.of(i))
            cong2 = cong.after_move(i, profile.of(i), br, game.resources.index)
            if not _lt(game.gamma_key(cong2, i, br), cur, None):
                continue
            profile = profile.replace(i, br)
            steps += 1
            moved = True
            if profile in seen:
                moved = None  # cycle: fall back to enumeration
                break
            seen.add(profile)
        if moved is None:
            break
        if not moved:
            stable = True
            break
    if stable and is_pne(game, profile).is_pne:
        return SolverResult(profile, "best-response", steps)
    for candidate in brute_force_pne(game):
        return SolverResult(candidate, "exhaustive", steps)
    raise AssertionError("player-specific matroid game without a pure Nash equilibrium; "
                         "this contradicts the existence theorem, so the instance or "
                         "oracle is broken")
