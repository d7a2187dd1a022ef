"""The game file format: a line-oriented sectioned text document.

    [meta]
    format: matroidcg-game 1
    flavor: weighted
    n: 2

    [players]
    1: weight=1/2
    2: weight=2

    [resources]
    e1 e2 e3

    [matroid 1]
    kind: uniform
    rank: 2

    [cost e1]
    kind: poly
    coeffs: 0 1

Numbers are explicit rational literals ("3/2"), never floats, so parsing
and serializing preserve exactness end to end.  ``#`` starts a comment.
Mixed flavors carry two channels per resource ([latency e]/[bottleneck e]);
player-specific flavors add "player i" to the section name.  Parsing runs
every load-time check and raises with the failing witness; serialization
is canonical, so parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .costs import (
    CountCost,
    LpAgg,
    MaxAgg,
    PolyFn,
    SetCost,
    StepFn,
    SumAgg,
    TableAgg,
    TableCost,
    TableFn,
    WeightCost,
)
from .errors import ContractError, GameFormatError
from .game import Flavor, GameInstance, load_checked
from .matroid import (
    ExplicitBases,
    ExplicitStrategies,
    GraphicMatroid,
    GroundSet,
    PartitionMatroid,
    StrategySpace,
    UniformMatroid,
)
from .values import format_rational, parse_rational

FORMAT_TAG = "matroidcg-game 1"
_NAME = re.compile(r"^[A-Za-z0-9_]+$")


class _Section:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.entries: list[tuple[str, str, int]] = []  # key, value, line

    def get(self, key: str, required: bool = True, default: str | None = None) -> str | None:
        hits = [v for k, v, _ in self.entries if k == key]
        if not hits:
            if required:
                raise GameFormatError(f"section [{self.name}] misses '{key}:'", self.line)
            return default
        if len(hits) > 1:
            raise GameFormatError(f"section [{self.name}] repeats '{key}:'", self.line)
        return hits[0]

    def all(self, key: str) -> list[tuple[str, int]]:
        return [(v, ln) for k, v, ln in self.entries if k == key]


def _tokenize(text: str) -> list[_Section]:
    sections: list[_Section] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise GameFormatError("unterminated section header", ln)
            sections.append(_Section(stripped[1:-1].strip(), ln))
            continue
        if not sections:
            raise GameFormatError("entry before any section header", ln)
        if ":" not in stripped:
            # bare lines are only meaningful in [resources]
            sections[-1].entries.append(("", stripped, ln))
            continue
        key, value = stripped.split(":", 1)
        sections[-1].entries.append((key.strip(), value.strip(), ln))
    return sections


# ---------------------------------------------------------------------------
# parsing


def parse_game_file(text: str) -> GameInstance:
    """Parse and fully validate a game document.

    Syntax problems raise GameFormatError with the line; semantic problems
    (non-matroid explicit family, non-monotone cost, cardinality mismatch)
    raise ValidationError carrying the witness.
    """
    sections = _tokenize(text)
    by_name: dict[str, _Section] = {}
    for s in sections:
        if s.name in by_name:
            raise GameFormatError(f"duplicate section [{s.name}]", s.line)
        by_name[s.name] = s
        if s.name != "resources":
            for key, _, ln in s.entries:
                if key == "":
                    raise GameFormatError(f"bare line inside [{s.name}]", ln)

    meta = by_name.get("meta")
    if meta is None:
        raise GameFormatError("missing [meta] section", 1)
    fmt = meta.get("format")
    if fmt != FORMAT_TAG:
        raise GameFormatError(f"unsupported format {fmt!r}", meta.line)
    try:
        flavor = Flavor(meta.get("flavor"))
    except ValueError:
        raise GameFormatError(f"unknown flavor {meta.get('flavor')!r}", meta.line)
    try:
        n = int(meta.get("n"))
    except ValueError:
        raise GameFormatError("n must be an integer", meta.line)
    extra_meta = {
        k: v for k, v, _ in meta.entries if k not in ("format", "flavor", "n")
    }

    resources = _parse_resources(by_name.get("resources"))
    weights, alphas = _parse_players(by_name.get("players"), n)
    spaces = [
        _parse_space(by_name.get(f"matroid {i}"), resources, i) for i in range(1, n + 1)
    ]

    kwargs: dict = {}
    if flavor in (Flavor.MIXED, Flavor.MIXED_SET_FUNCTIONAL):
        kwargs["costs"] = [_parse_cost(by_name, "latency", e, None, flavor, n) for e in resources]
        kwargs["bot_costs"] = [_parse_cost(by_name, "bottleneck", e, None, flavor, n) for e in resources]
    elif flavor == Flavor.PLAYER_SPECIFIC_MIXED:
        kwargs["ps_costs"] = [
            [_parse_cost(by_name, "latency", e, i, flavor, n) for e in resources]
            for i in range(1, n + 1)
        ]
        kwargs["ps_bot_costs"] = [
            [_parse_cost(by_name, "bottleneck", e, i, flavor, n) for e in resources]
            for i in range(1, n + 1)
        ]
    elif flavor == Flavor.PLAYER_SPECIFIC:
        kwargs["ps_costs"] = [
            [_parse_cost(by_name, "cost", e, i, flavor, n) for e in resources]
            for i in range(1, n + 1)
        ]
    else:
        kwargs["costs"] = [_parse_cost(by_name, "cost", e, None, flavor, n) for e in resources]

    if flavor == Flavor.SET_FUNCTIONAL:
        kwargs["aggregator"] = _parse_aggregator(by_name.get("aggregator"))
    elif "aggregator" in by_name:
        raise GameFormatError(
            f"flavor {flavor.value} takes no [aggregator]", by_name["aggregator"].line)

    known = {"meta", "players", "resources", "aggregator"}
    known.update(f"matroid {i}" for i in range(1, n + 1))
    for s in sections:
        if s.name in known or _COST_SECTION.match(s.name):
            continue
        raise GameFormatError(f"unknown section [{s.name}]", s.line)

    game = GameInstance(
        flavor,
        resources,
        spaces,
        weights=weights,
        alphas=alphas,
        meta=extra_meta,
        **kwargs,
    )
    return load_checked(game)


_COST_SECTION = re.compile(r"^(cost|latency|bottleneck) ([A-Za-z0-9_]+)( player (\d+))?$")


def _parse_resources(sec: _Section | None) -> GroundSet:
    if sec is None:
        raise GameFormatError("missing [resources] section", 1)
    names: list[str] = []
    for key, value, ln in sec.entries:
        if key != "":
            raise GameFormatError("the resources section holds plain lines of names", ln)
        for tok in value.split():
            if not _NAME.match(tok):
                raise GameFormatError(f"bad resource name {tok!r}", ln)
            names.append(tok)
    if not names:
        raise GameFormatError("empty resource list", sec.line)
    try:
        return GroundSet(tuple(names))
    except ContractError as exc:
        raise GameFormatError(str(exc), sec.line)


def _parse_players(sec: _Section | None, n: int):
    weights: dict[int, Fraction] = {}
    alphas: dict[int, Fraction] = {}
    seen: set[int] = set()
    if sec is not None:
        for key, value, ln in sec.entries:
            try:
                pid = int(key)
            except ValueError:
                raise GameFormatError(f"player id {key!r} is not an integer", ln)
            if pid in seen:
                raise GameFormatError(f"duplicate player {pid}", ln)
            if not 1 <= pid <= n:
                raise GameFormatError(f"player {pid} outside 1..{n}", ln)
            seen.add(pid)
            for tok in value.split():
                if "=" not in tok:
                    raise GameFormatError(f"expected attr=value, got {tok!r}", ln)
                attr, s = tok.split("=", 1)
                if attr == "weight":
                    weights[pid] = parse_rational(s, ln)
                elif attr == "alpha":
                    alphas[pid] = parse_rational(s, ln)
                else:
                    raise GameFormatError(f"unknown player attribute {attr!r}", ln)
    if weights and len(weights) != n:
        raise GameFormatError("either all players carry weights or none", sec.line)
    if alphas and len(alphas) != n:
        raise GameFormatError("either all players carry alphas or none", sec.line)
    w = [weights[i] for i in range(1, n + 1)] if weights else None
    a = [alphas[i] for i in range(1, n + 1)] if alphas else None
    return w, a


def _parse_set(value: str, resources: GroundSet, ln: int) -> frozenset:
    names = value.split()
    for e in names:
        if e not in resources:
            raise GameFormatError(f"unknown resource {e!r}", ln)
    if len(set(names)) != len(names):
        raise GameFormatError("repeated resource in set", ln)
    return frozenset(names)


def _parse_space(sec: _Section | None, resources: GroundSet, i: int) -> StrategySpace:
    if sec is None:
        raise GameFormatError(f"missing [matroid {i}] section", 1)
    kind = sec.get("kind")
    ln = sec.line
    try:
        if kind == "uniform":
            return UniformMatroid(resources, int(sec.get("rank")))
        if kind == "partition":
            blocks = []
            for value, bln in sec.all("block"):
                if "|" not in value:
                    raise GameFormatError("block line needs '<elems> | cap <k>'", bln)
                elems, cap = value.split("|", 1)
                cap = cap.strip()
                if not cap.startswith("cap "):
                    raise GameFormatError("block capacity must read 'cap <k>'", bln)
                blocks.append((_parse_set(elems, resources, bln), int(cap[4:])))
            return PartitionMatroid(resources, blocks)
        if kind == "graphic":
            edges = {}
            for value, eln in sec.all("edge"):
                if "=" not in value:
                    raise GameFormatError("edge line needs '<resource> = u - v'", eln)
                name, uv = value.split("=", 1)
                name = name.strip()
                if name not in resources:
                    raise GameFormatError(f"unknown resource {name!r}", eln)
                if "-" not in uv:
                    raise GameFormatError("edge endpoints must read 'u - v'", eln)
                u, v = uv.split("-", 1)
                edges[name] = (u.strip(), v.strip())
            if set(edges) != set(resources.elements):
                raise GameFormatError("graphic matroid must map every resource to an edge", ln)
            return GraphicMatroid(resources, edges)
        if kind == "explicit":
            bases = [_parse_set(v, resources, bln) for v, bln in sec.all("base")]
            return ExplicitBases(resources, bases)
        if kind == "strategies":
            sets = [_parse_set(v, resources, sln) for v, sln in sec.all("set")]
            return ExplicitStrategies(resources, sets)
    except ContractError as exc:
        raise GameFormatError(f"matroid {i}: {exc}", ln)
    except ValueError as exc:
        raise GameFormatError(f"matroid {i}: {exc}", ln)
    raise GameFormatError(f"unknown strategy space kind {kind!r}", ln)


def _parse_cost(by_name, channel: str, e: str, player: int | None,
                flavor: Flavor, n: int) -> SetCost:
    name = f"{channel} {e}" + (f" player {player}" if player is not None else "")
    sec = by_name.get(name)
    if sec is None:
        raise GameFormatError(f"missing [{name}] section", 1)
    kind = sec.get("kind")
    ln = sec.line
    if kind == "count":
        values = tuple(parse_rational(tok, ln) for tok in sec.get("values").split())
        if not values:
            raise GameFormatError("count cost needs at least one value", ln)
        return CountCost(TableFn(values))
    if kind == "poly":
        coeffs = tuple(parse_rational(tok, ln) for tok in sec.get("coeffs").split())
        fn = PolyFn(coeffs)
    elif kind == "steps":
        pts = []
        for value, sln in sec.all("at"):
            if "->" not in value:
                raise GameFormatError("step line needs '<threshold> -> <value>'", sln)
            t, v = value.split("->", 1)
            pts.append((parse_rational(t, sln), parse_rational(v, sln)))
        try:
            fn = StepFn(tuple(t for t, _ in pts), tuple(v for _, v in pts))
        except ContractError as exc:
            raise GameFormatError(str(exc), ln)
    elif kind == "table":
        if flavor not in (Flavor.SET_FUNCTIONAL, Flavor.MIXED_SET_FUNCTIONAL):
            raise GameFormatError(f"table costs need a set-functional flavor, not {flavor.value}", ln)
        entries = {}
        for value, tln in sec.all("set"):
            if "->" not in value:
                raise GameFormatError("table line needs '<players> -> <value>'", tln)
            ids, v = value.split("->", 1)
            try:
                X = frozenset(int(t) for t in ids.split())
            except ValueError:
                raise GameFormatError("player ids must be integers", tln)
            if any(not 1 <= p <= n for p in X):
                raise GameFormatError(f"player id outside 1..{n}", tln)
            if X in entries:
                raise GameFormatError(f"duplicate table entry for {sorted(X)}", tln)
            entries[X] = parse_rational(v, tln)
        return TableCost(entries)
    else:
        raise GameFormatError(f"unknown cost kind {kind!r}", ln)
    # poly / steps land here: weighted flavor uses them directly, the
    # set-functional flavors wrap them as weight-induced set costs
    if flavor in (Flavor.WEIGHTED, Flavor.SET_FUNCTIONAL, Flavor.MIXED_SET_FUNCTIONAL):
        return WeightCost(fn)
    raise GameFormatError(f"cost kind {kind!r} not meaningful for flavor {flavor.value}", ln)


def _parse_aggregator(sec: _Section | None):
    if sec is None:
        raise GameFormatError("missing [aggregator] section", 1)
    kind = sec.get("kind")
    ln = sec.line
    r_text = sec.get("r", required=False)
    r = int(r_text) if r_text is not None else None
    if kind == "sum":
        return SumAgg(r=r)
    if kind == "max":
        return MaxAgg(r=r)
    if kind == "lp":
        return LpAgg(parse_rational(sec.get("p"), ln), r=r)
    if kind == "table":
        if r is None:
            raise GameFormatError("table aggregator needs 'r:'", ln)
        grid = tuple(parse_rational(tok, ln) for tok in sec.get("grid").split())
        entries = {}
        for value, eln in sec.all("entry"):
            if "->" not in value:
                raise GameFormatError("entry line needs '<values> -> <value>'", eln)
            args, out = value.split("->", 1)
            key = tuple(sorted(parse_rational(t, eln) for t in args.split()))
            if len(key) != r:
                raise GameFormatError(f"entry arity {len(key)} != r = {r}", eln)
            out_v = parse_rational(out, eln)
            if key in entries and entries[key] != out_v:
                raise GameFormatError(
                    f"conflicting entries for {key}: permutation invariance violated", eln)
            entries[key] = out_v
        try:
            return TableAgg(grid, entries, r)
        except ContractError as exc:
            raise GameFormatError(str(exc), ln)
    raise GameFormatError(f"unknown aggregator kind {kind!r}", ln)


# ---------------------------------------------------------------------------
# serialization


def serialize_game(game: GameInstance) -> str:
    """Canonical text form; byte-stable for identical instances."""
    out: list[str] = ["[meta]", f"format: {FORMAT_TAG}", f"flavor: {game.flavor.value}",
                      f"n: {game.n}"]
    for k in sorted(game.meta):
        out.append(f"{k}: {game.meta[k]}")
    out.append("")

    attrs = []
    for i in game.players:
        parts = [f"{i}:"]
        if game.weights is not None:
            parts.append(f"weight={format_rational(game.weights[i - 1])}")
        if game.alphas is not None:
            parts.append(f"alpha={format_rational(game.alphas[i - 1])}")
        attrs.append(" ".join(parts))
    if game.weights is not None or game.alphas is not None:
        out.append("[players]")
        out.extend(attrs)
        out.append("")

    out.append("[resources]")
    out.append(" ".join(game.resources.elements))
    out.append("")

    for i in game.players:
        out.append(f"[matroid {i}]")
        out.extend(_serialize_space(game.spaces[i - 1], game.resources))
        out.append("")

    labels = {"c": "cost", "l": "latency", "b": "bottleneck"}
    per_player = game.flavor in (Flavor.PLAYER_SPECIFIC, Flavor.PLAYER_SPECIFIC_MIXED)
    for e_idx, e in enumerate(game.resources):
        for tag in game.channel_tags():
            for p in (game.players if per_player else (None,)):
                c = game.channel(tag, p if p is not None else 1, e_idx)
                suffix = f" player {p}" if p is not None else ""
                out.append(f"[{labels[tag]} {e}{suffix}]")
                out.extend(_serialize_cost(c))
                out.append("")

    if game.aggregator is not None:
        out.append("[aggregator]")
        out.extend(_serialize_aggregator(game.aggregator))
        out.append("")
    return "\n".join(out)


def _serialize_space(sp: StrategySpace, resources: GroundSet) -> list[str]:
    if isinstance(sp, UniformMatroid):
        return ["kind: uniform", f"rank: {sp.rank}"]
    if isinstance(sp, PartitionMatroid):
        lines = ["kind: partition"]
        blocks = sorted(sp.blocks, key=lambda bc: resources.subset_key(bc[0]))
        for block, cap in blocks:
            lines.append(f"block: {' '.join(resources.sort(block))} | cap {cap}")
        return lines
    if isinstance(sp, GraphicMatroid):
        lines = ["kind: graphic"]
        for e in resources:
            u, v = sp.edges[e]
            lines.append(f"edge: {e} = {u} - {v}")
        return lines
    if isinstance(sp, ExplicitBases):
        return ["kind: explicit"] + [f"base: {' '.join(resources.sort(B))}" for B in sp.bases]
    if isinstance(sp, ExplicitStrategies):
        return ["kind: strategies"] + [f"set: {' '.join(resources.sort(S))}" for S in sp.sets]
    raise ContractError(f"cannot serialize strategy space {sp!r}")


def _serialize_cost(c: SetCost) -> list[str]:
    if isinstance(c, CountCost) and isinstance(c.fn, TableFn):
        return ["kind: count", "values: " + " ".join(format_rational(v) for v in c.fn.values)]
    if isinstance(c, WeightCost) and isinstance(c.fn, PolyFn):
        return ["kind: poly", "coeffs: " + " ".join(format_rational(v) for v in c.fn.coeffs)]
    if isinstance(c, WeightCost) and isinstance(c.fn, StepFn):
        lines = ["kind: steps"]
        for t, v in zip(c.fn.thresholds, c.fn.levels):
            lines.append(f"at: {format_rational(t)} -> {format_rational(v)}")
        return lines
    if isinstance(c, TableCost):
        lines = ["kind: table"]
        for X in sorted(c.entries, key=lambda s: (len(s), tuple(sorted(s)))):
            ids = " ".join(str(p) for p in sorted(X))
            head = f"set: {ids} -> " if ids else "set: -> "
            lines.append(head + format_rational(c.entries[X]))
        return lines
    raise ContractError(f"cost {c!r} has no serializable representation")


def _serialize_aggregator(g) -> list[str]:
    lines = [f"kind: {g.kind}"]
    if isinstance(g, LpAgg):
        lines.append(f"p: {format_rational(g.p)}")
    if isinstance(g, TableAgg):
        lines.append(f"r: {g.r}")
        lines.append("grid: " + " ".join(format_rational(v) for v in g.grid))
        for key in sorted(g.entries):
            args = " ".join(format_rational(v) for v in key)
            lines.append(f"entry: {args} -> {format_rational(g.entries[key])}")
    elif g.r is not None:
        lines.append(f"r: {g.r}")
    return lines
