"""Constructive reductions between game models.

Each reduction emits a fresh validated GameInstance and records its
provenance in the instance meta.  Equilibrium transfer differs by
construction and is part of each contract:

  weighted -> set-functional          cost-identical, so PNE sets coincide
  mixed singleton -> player-specific  cost-identical on singleton profiles
  mixed 0/1 -> player-specific        every PNE of the target is one of the
                                      source (converse not claimed)
  mixed + dependence -> set-functional  same direction as above
"""

from __future__ import annotations

from fractions import Fraction

from .costs import CountCost, SumAgg, TableFn
from .errors import ContractError, ValidationError
from .game import Flavor, GameInstance, load_checked, mask_of, set_of_mask, subsets

__all__ = [
    "reduce_weighted_to_setfunctional",
    "reduce_mixed_singleton_to_player_specific",
    "reduce_mixed_01_to_player_specific",
    "reduce_mixed_md_to_setfunctional",
]


def _provenance(game: GameInstance, mode: str) -> dict:
    meta = dict(game.meta)
    meta["provenance"] = f"reduced:{mode}"
    return meta


def reduce_weighted_to_setfunctional(game: GameInstance) -> GameInstance:
    """Rewrite a weighted game as a set-functional game with sum
    aggregation; every resource cost becomes the weight-induced set
    function c'(N') = c(w(N')), so player costs agree on every profile."""
    if game.flavor != Flavor.WEIGHTED:
        raise ContractError("reduction expects the weighted flavor")
    costs = [c.with_weights(game.weights) for c in game.costs]
    return load_checked(
        GameInstance(
            Flavor.SET_FUNCTIONAL,
            game.resources,
            list(game.spaces),
            weights=list(game.weights),
            costs=costs,
            aggregator=SumAgg(),
            meta=_provenance(game, "weighted-to-setfunctional"),
        )
    )


def _count_table(fn, n: int) -> TableFn:
    return TableFn(tuple(Fraction(fn(k)) for k in range(n + 1)))


def _mixed_count_channels(game: GameInstance, i: int, e_idx: int):
    """Latency/bottleneck count functions of player i at a resource, for
    either the shared or the player-specific mixed flavor."""
    lat = game.channel("l", i, e_idx)
    bot = game.channel("b", i, e_idx)
    if not isinstance(lat, CountCost) or not isinstance(bot, CountCost):
        raise ContractError("reduction expects count-based mixed channels")
    return lat.fn, bot.fn


def reduce_mixed_singleton_to_player_specific(game: GameInstance) -> GameInstance:
    """Blend the two channels into one player-specific cost
    c'(x) = alpha * latency(x) + (1 - alpha) * bottleneck(x).

    Requires every strategy of every player to be a singleton; on such
    profiles the blended game has identical costs, so the PNE sets of
    source and target coincide."""
    if game.flavor not in (Flavor.MIXED, Flavor.PLAYER_SPECIFIC_MIXED):
        raise ContractError("reduction expects a count-based mixed flavor")
    for i in game.players:
        for S in game.strategy_list(i):
            if len(S) != 1:
                raise ContractError(f"player {i} has a non-singleton strategy {sorted(S)}")
    n = game.n
    ps = []
    for i in game.players:
        a = game.alphas[i - 1]
        row = []
        for e_idx in range(len(game.resources)):
            lf, bf = _mixed_count_channels(game, i, e_idx)
            row.append(CountCost(TableFn(
                tuple(a * Fraction(lf(k)) + (1 - a) * Fraction(bf(k)) for k in range(n + 1))
            )))
        ps.append(row)
    return load_checked(
        GameInstance(
            Flavor.PLAYER_SPECIFIC,
            game.resources,
            list(game.spaces),
            weights=list(game.weights) if game.weights else None,
            ps_costs=ps,
            meta=_provenance(game, "mixed-singleton-to-player-specific"),
        )
    )


def reduce_mixed_01_to_player_specific(game: GameInstance) -> GameInstance:
    """Replace mixed costs by the active channel of each player: latency
    for alpha = 1, bottleneck for alpha = 0.

    Requires matroid strategy spaces and 0/1 preference values.  Every PNE
    of the target is a PNE of the source (a min-sum base also minimizes
    the maximum, which covers the bottleneck players); the converse does
    not hold in general."""
    if game.flavor not in (Flavor.MIXED, Flavor.PLAYER_SPECIFIC_MIXED):
        raise ContractError("reduction expects a count-based mixed flavor")
    if not game.all_matroid():
        raise ContractError("reduction expects matroid strategy spaces")
    if any(a not in (0, 1) for a in game.alphas):
        raise ContractError("reduction expects preference values in {0, 1}")
    n = game.n
    ps = []
    for i in game.players:
        keep_latency = game.alphas[i - 1] == 1
        row = []
        for e_idx in range(len(game.resources)):
            lf, bf = _mixed_count_channels(game, i, e_idx)
            row.append(CountCost(_count_table(lf if keep_latency else bf, n)))
        ps.append(row)
    return load_checked(
        GameInstance(
            Flavor.PLAYER_SPECIFIC,
            game.resources,
            list(game.spaces),
            weights=list(game.weights) if game.weights else None,
            ps_costs=ps,
            meta=_provenance(game, "mixed-01-to-player-specific"),
        )
    )


def reduce_mixed_md_to_setfunctional(game: GameInstance, d=None) -> GameInstance:
    """Drop the bottleneck channel of a monotone-dependent mixed game,
    keeping c = latency under sum aggregation.

    The dependence b = d(latency) is verified pointwise over achievable
    congestions (and d checked nondecreasing); a provided ``d`` callable is
    verified too.  Every PNE of the target is a PNE of the source."""
    if game.flavor not in (Flavor.MIXED, Flavor.MIXED_SET_FUNCTIONAL):
        raise ContractError("reduction expects a shared-channel mixed flavor")
    seen: dict[Fraction, Fraction] = {}
    pairs = []
    for e_idx, e in enumerate(game.resources):
        users = set_of_mask(game.support_mask(e_idx))
        for X in subsets(users):
            mask = mask_of(X)
            lv = game.channel_value("l", 1, e_idx, mask)
            bv = game.channel_value("b", 1, e_idx, mask)
            if d is not None and Fraction(d(lv)) != bv:
                raise ValidationError(
                    f"dependence violated at resource {e}, subset {sorted(X)}: "
                    f"d({lv}) = {d(lv)} but bottleneck is {bv}",
                    witness=(e, X))
            if lv in seen and seen[lv] != bv:
                raise ValidationError(
                    f"no single dependence map: latency {lv} maps to both {seen[lv]} and {bv}",
                    witness=(e, X))
            seen[lv] = bv
            pairs.append((lv, bv))
    pts = sorted(seen.items())
    for (l1, b1), (l2, b2) in zip(pts, pts[1:]):
        if b1 > b2:
            raise ValidationError(
                f"dependence not monotone: d({l1})={b1} > d({l2})={b2}",
                witness=((l1, b1), (l2, b2)))
    return load_checked(
        GameInstance(
            Flavor.SET_FUNCTIONAL,
            game.resources,
            list(game.spaces),
            weights=list(game.weights) if game.weights else None,
            costs=list(game.costs),
            aggregator=SumAgg(),
            meta=_provenance(game, "mixed-md-to-setfunctional"),
        )
    )
