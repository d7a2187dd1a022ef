"""Profile-sweep backend: compiled kernel with a pure-Python fallback.

Brute-force equilibrium enumeration is the one hot loop of the package.
When a game's cost tables scale to 64-bit integers (a common denominator
turns every rational exactly into an int, preserving all comparisons),
the sweep runs in the compiled extension; otherwise, and whenever the
extension is unavailable or MATROIDCG_PURE=1, the object evaluator runs
the same scan.  Both paths enumerate profiles in identical canonical
order and return identical lists, which the test suite asserts.
"""

from __future__ import annotations

import itertools
import os
from array import array
from fractions import Fraction
from math import lcm

from .costs import LpAgg, MaxAgg, SumAgg, TableAgg
from .game import (
    Congestion,
    Flavor,
    GameInstance,
    MIXED_FLAVORS,
    PLAYER_SPECIFIC_FLAVORS,
    StrategyProfile,
)
from .values import value_lt

try:  # compiled kernel is optional; see setup.py
    from . import _speed  # type: ignore

    HAVE_EXT = True
except ImportError:  # pragma: no cover - depends on the build
    _speed = None
    HAVE_EXT = False

INT_BOUND = 1 << 61


def force_pure() -> bool:
    return os.environ.get("MATROIDCG_PURE", "") not in ("", "0")


def backend_name(game: GameInstance | None = None) -> str:
    if not HAVE_EXT or force_pure():
        return "pure"
    if game is not None and pack_game(game) is None:
        return "pure"
    return "compiled"


def sweep_pne(game: GameInstance, tol: float | None = None) -> list[StrategyProfile]:
    """All pure Nash equilibria, canonical order.  Dispatches per game."""
    lists = [game.strategy_list(i) for i in game.players]
    packed = None
    if tol is None and HAVE_EXT and not force_pure():
        packed = pack_game(game)
    if packed is not None:
        flat = _speed.sweep_pne(*packed)
        counts = [len(l) for l in lists]
        out = []
        for f in flat:
            idxs = [0] * game.n
            for i in range(game.n - 1, -1, -1):
                idxs[i] = f % counts[i]
                f //= counts[i]
            out.append(StrategyProfile(tuple(lists[i][idxs[i]] for i in range(game.n))))
        return out
    return _object_sweep(game, lists, tol)


def _object_sweep(game: GameInstance, lists, tol) -> list[StrategyProfile]:
    index = game.resources.index
    m = len(game.resources)
    out = []
    for combo in itertools.product(*lists):
        masks = [0] * m
        for i0, S_i in enumerate(combo):
            bit = 1 << i0
            for e in S_i:
                masks[index[e]] |= bit
        cong = Congestion(tuple(masks))
        pne = True
        for i in game.players:
            S_i = combo[i - 1]
            cur = game.gamma_key(cong, i, S_i)
            for alt in lists[i - 1]:
                if alt == S_i:
                    continue
                cong2 = cong.after_move(i, S_i, alt, index)
                k2 = game.gamma_key(cong2, i, alt)
                better = value_lt(k2, cur) if tol is None else value_lt(k2, cur, tol)
                if better:
                    pne = False
                    break
            if not pne:
                break
        if pne:
            out.append(StrategyProfile(tuple(combo)))
    return out


# ---------------------------------------------------------------------------
# packing games into exact integer tables


def _submasks(support: int):
    sub = support
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & support


def pack_game(game: GameInstance):
    """Arguments for the compiled sweep, or None when the game does not fit
    (too many players/resources, fractional-p aggregation, or values too
    large to scale into 64-bit integers)."""
    n, m = game.n, len(game.resources)
    if n > 12 or m > 63:
        return None
    lists = [game.strategy_list(i) for i in game.players]
    if any(not l for l in lists):
        return None
    mask_space = 1 << n

    counts = array("q", [len(l) for l in lists])
    sptr = array("q", [])
    slen = array("q", [])
    sres = array("q", [])
    for i, l in enumerate(lists):
        for S in l:
            sptr.append(len(sres))
            slen.append(len(S))
            sres.extend(sorted(game.resources.index[e] for e in S))

    mixed = game.flavor in MIXED_FLAVORS
    ps = game.flavor in PLAYER_SPECIFIC_FLAVORS
    rows = game.n if ps else 1

    def channel_values(tag):
        vals = {}
        for i in range(1, rows + 1):
            for e_idx in range(m):
                sup = game.support_mask(e_idx)
                for sub in _submasks(sup):
                    vals[(i, e_idx, sub)] = game.channel_value(tag, i, e_idx, sub)
        return vals

    def scaled_table(vals, scale):
        tab = array("q", bytes(8 * rows * m * mask_space))
        for (i, e_idx, sub), v in vals.items():
            tab[((i - 1) * m + e_idx) * mask_space + sub] = int(v * scale)
        return tab

    empty = array("q", [0])  # placeholder for unused kernel tables
    op = 0
    p = 1
    gidx, agg_out, grid_size, r = empty, empty, 0, 0
    lat = bot = empty
    anum = arest = empty
    ctab = empty

    if not mixed:
        g = game.aggregator if game.flavor == Flavor.SET_FUNCTIONAL else None
        vals = channel_values("c")
        denoms = [Fraction(v).denominator for v in vals.values()]
        scale = lcm(*denoms) if denoms else 1
        vmax = max((abs(int(v * scale)) for v in vals.values()), default=0)
        if g is None or isinstance(g, SumAgg):
            op, bound = 0, m * vmax
        elif isinstance(g, MaxAgg):
            op, bound = 1, vmax
        elif isinstance(g, LpAgg):
            if not g.integer_p or g.p.numerator > 16:
                return None
            op, p = 2, g.p.numerator
            bound = m * vmax**p
        elif isinstance(g, TableAgg):
            op = 3
            grid_size, r = len(g.grid), g.r
            if grid_size**r > 4_000_000:
                return None
            out_denoms = [v.denominator for v in g.entries.values()]
            out_scale = lcm(*out_denoms) if out_denoms else 1
            agg_out = array("q", bytes(8 * grid_size**r))
            pos = {v: k for k, v in enumerate(g.grid)}
            for tup in itertools.product(range(grid_size), repeat=r):
                key = tuple(sorted(g.grid[t] for t in tup))
                flat = 0
                for t in tup:
                    flat = flat * grid_size + t
                agg_out[flat] = int(g.entries[key] * out_scale)
            bound = max((abs(v) for v in agg_out), default=0)
            gidx = array("q", bytes(8 * m * mask_space))
            for (i, e_idx, sub), v in vals.items():
                if v not in pos:
                    return None
                gidx[e_idx * mask_space + sub] = pos[v]
        else:
            return None
        if bound >= INT_BOUND:
            return None
        ctab = scaled_table(vals, scale)
    else:
        lvals = channel_values("l")
        bvals = channel_values("b")
        denoms = [Fraction(v).denominator for v in lvals.values()]
        denoms += [Fraction(v).denominator for v in bvals.values()]
        scale = lcm(*denoms) if denoms else 1
        lat = scaled_table(lvals, scale)
        bot = scaled_table(bvals, scale)
        anum = array("q", [0] * n)
        arest = array("q", [0] * n)
        for i in range(n):
            a = game.alphas[i]
            anum[i] = a.numerator
            arest[i] = a.denominator - a.numerator
        lmax = max((abs(v) for v in lat), default=0)
        bmax = max((abs(v) for v in bot), default=0)
        bound = max(anum[i] * m * lmax + arest[i] * bmax for i in range(n))
        if bound >= INT_BOUND:
            return None

    return (
        n, m, counts, sptr, slen, sres,
        1 if mixed else 0, op, p, mask_space,
        ctab, 1 if ps else 0,
        gidx, agg_out, grid_size, r,
        lat, bot, anum, arest,
    )
