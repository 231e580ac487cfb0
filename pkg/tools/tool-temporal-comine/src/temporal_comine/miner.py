"""Exact temporal motif mining.

``mine_single`` is the baseline backtracking search for one motif: the first
motif edge scans every graph edge, later edges scan either the out-edges of
an already mapped source vertex or the global edge list, always restricted to
edges after the previous match and inside the time window. ``co_mine`` runs
the same search guided by an MG-Tree so that shared prefixes are matched once.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Protocol

from .graph import TemporalGraph
from .mgtree import MGNode, MGTree
from .motif import Edge, Mode, Motif

logger = logging.getLogger(__name__)


@dataclass
class MatchContext:
    """Book-keeping of a partial match.

    Attributes:
        e_stack: Matched edge ids in temporal rank order
        m2g: Motif vertex -> graph vertex
        g2m: Graph vertex -> motif vertex
        incnt: Number of matched edges incident to each graph vertex
    """

    e_stack: list[int] = field(default_factory=list)
    m2g: dict[int, int] = field(default_factory=dict)
    g2m: dict[int, int] = field(default_factory=dict)
    incnt: dict[int, int] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return not (self.e_stack or self.m2g or self.g2m or self.incnt)


def roll_on_edge(ctx: MatchContext, u_m: int, v_m: int, u_g: int, v_g: int) -> MatchContext:
    """Record the mapping of motif edge (u_m, v_m) onto graph edge (u_g, v_g)."""
    for m, gv in ((u_m, u_g), (v_m, v_g)):
        mapped = ctx.m2g.get(m)
        if mapped is not None and mapped != gv:
            raise AssertionError(f"motif vertex {m} already mapped to {mapped}, not {gv}")
        back = ctx.g2m.get(gv)
        if back is not None and back != m:
            raise AssertionError(f"graph vertex {gv} already mapped to motif vertex {back}, not {m}")
        ctx.m2g[m] = gv
        ctx.g2m[gv] = m
        ctx.incnt[gv] = ctx.incnt.get(gv, 0) + 1
    return ctx


def roll_back_edge(ctx: MatchContext, u_g: int, v_g: int) -> MatchContext:
    """Undo :func:`roll_on_edge`; vertices with no remaining incident edge are unmapped."""
    for gv in (u_g, v_g):
        count = ctx.incnt.get(gv, 0)
        if count <= 0:
            raise AssertionError(f"incidence underflow on graph vertex {gv}")
        if count == 1:
            del ctx.incnt[gv]
            del ctx.m2g[ctx.g2m.pop(gv)]
        else:
            ctx.incnt[gv] = count - 1
    return ctx


class Verdict(Enum):
    """Outcome of a candidate check."""

    ACCEPT = "accept"
    TEMPORAL_ORDER = "temporal_order"
    TIME_WINDOW = "time_window"
    STRUCTURAL = "structural"


def check_candidate(
    ctx: MatchContext,
    g: TemporalGraph,
    edge_id: int,
    motif_edge: Edge,
    rank: int,
    delta: int,
) -> Verdict:
    """Check a graph edge against the partial match for motif edge ``rank``.

    Rejects edges that do not follow the last matched edge in the total
    order, that fall outside the window opened by the first matched edge, or
    that would break the one-to-one vertex correspondence.
    """
    if rank > 0:
        if edge_id <= ctx.e_stack[-1]:
            return Verdict.TEMPORAL_ORDER
        if g.t_list[edge_id] - g.t_list[ctx.e_stack[0]] > delta:
            return Verdict.TIME_WINDOW
    u_g = g.src_list[edge_id]
    v_g = g.dst_list[edge_id]
    if u_g == v_g:
        return Verdict.STRUCTURAL
    u_m, v_m = motif_edge
    for m, gv in ((u_m, u_g), (v_m, v_g)):
        mapped = ctx.m2g.get(m)
        if mapped is None:
            if gv in ctx.g2m:
                return Verdict.STRUCTURAL
        elif mapped != gv:
            return Verdict.STRUCTURAL
    return Verdict.ACCEPT


@dataclass
class SearchStats:
    """Instrumentation counters of a search.

    Attributes:
        visits: Candidate edges examined
        expansions: Candidates accepted and pushed on the stack
        matches: Matches emitted over all motifs
        node_visits: Candidate visits per MG-Tree node label (co-mining only)
    """

    visits: int = 0
    expansions: int = 0
    matches: int = 0
    node_visits: Counter[str] = field(default_factory=Counter)

    def merge(self, other: SearchStats) -> SearchStats:
        self.visits += other.visits
        self.expansions += other.expansions
        self.matches += other.matches
        self.node_visits.update(other.node_visits)
        return self

    def to_dict(self) -> dict[str, object]:
        return {
            "visits": self.visits,
            "expansions": self.expansions,
            "matches": self.matches,
            "node_visits": dict(sorted(self.node_visits.items())),
        }


class MatchSink(Protocol):
    """Receives enumerated matches."""

    def emit(self, name: str, edge_ids: Sequence[int]) -> None: ...


class ListSink:
    """Collects matches in memory, one list per motif."""

    def __init__(self, matches: dict[str, list[tuple[int, ...]]] | None = None) -> None:
        self.matches = matches if matches is not None else {}

    def emit(self, name: str, edge_ids: Sequence[int]) -> None:
        self.matches.setdefault(name, []).append(tuple(edge_ids))


class FileSink:
    """Streams matches to one text file per motif: ``name: e1,e2,...``."""

    def __init__(self, directory: str | Path, prefix: str = "matches_") -> None:
        self.directory = Path(directory)
        self.prefix = prefix
        self._files: dict[str, IO[str]] = {}

    def path_for(self, name: str) -> Path:
        return self.directory / f"{self.prefix}{name}.txt"

    def emit(self, name: str, edge_ids: Sequence[int]) -> None:
        handle = self._files.get(name)
        if handle is None:
            self.directory.mkdir(parents=True, exist_ok=True)
            handle = open(self.path_for(name), "w", encoding="utf-8")  # noqa: SIM115
            self._files[name] = handle
        handle.write(f"{name}: {','.join(map(str, edge_ids))}\n")

    @property
    def paths(self) -> list[Path]:
        return [self.path_for(name) for name in self._files]

    def close(self) -> None:
        for handle in self._files.values():
            handle.close()
        self._files.clear()

    def __enter__(self) -> FileSink:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


@dataclass
class MatchResult:
    """Per-motif counts, optional enumerated matches and search statistics."""

    counts: dict[str, int]
    matches: dict[str, list[tuple[int, ...]]] | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    @classmethod
    def empty(cls, names: Iterable[str], mode: Mode = Mode.COUNT, collect: bool = True) -> MatchResult:
        names = list(names)
        matches = {name: [] for name in names} if mode is Mode.ENUMERATE and collect else None
        return cls(counts=dict.fromkeys(names, 0), matches=matches)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: MatchResult) -> MatchResult:
        for name, count in other.counts.items():
            self.counts[name] = self.counts.get(name, 0) + count
        if other.matches is not None:
            if self.matches is None:
                self.matches = {}
            for name, found in other.matches.items():
                self.matches.setdefault(name, []).extend(found)
        self.stats.merge(other.stats)
        return self

    def match_sets(self) -> dict[str, set[tuple[int, ...]]]:
        return {name: set(found) for name, found in (self.matches or {}).items()}

    def to_dict(self) -> dict[str, object]:
        return {"counts": dict(self.counts), "stats": self.stats.to_dict()}


class _Search:
    """State shared by the recursive searches: graph views, window, context."""

    def __init__(
        self,
        g: TemporalGraph,
        delta: int,
        result: MatchResult,
        mode: Mode,
        sink: MatchSink | None,
        context: MatchContext | None,
    ) -> None:
        self.g = g
        self.delta = delta
        self.result = result
        self.stats = result.stats
        self.ctx = context if context is not None else MatchContext()
        if mode is Mode.ENUMERATE:
            self.sink: MatchSink | None = sink if sink is not None else ListSink(result.matches)
        else:
            self.sink = None

    def candidates(self, rank: int, u_m: int) -> Iterable[int]:
        g = self.g
        if rank == 0:
            return range(g.num_edges)
        stack = self.ctx.e_stack
        t_max = g.t_list[stack[0]] + self.delta
        u_g = self.ctx.m2g.get(u_m)
        if u_g is None:
            lo, hi = g.global_range(stack[-1], t_max)
            return range(lo, hi)
        lo, hi = g.out_range(u_g, stack[-1], t_max)
        return g.out_ids[u_g][lo:hi]

    def emit(self, name: str) -> None:
        self.result.counts[name] += 1
        self.stats.matches += 1
        if self.sink is not None:
            self.sink.emit(name, self.ctx.e_stack)


def mine_single(
    g: TemporalGraph,
    m: Motif,
    delta: int,
    mode: Mode = Mode.COUNT,
    sink: MatchSink | None = None,
    context: MatchContext | None = None,
) -> MatchResult:
    """Count (or enumerate) the delta-temporal matches of one motif.

    Args:
        g: Indexed temporal graph
        m: Canonical motif
        delta: Window length in graph time units
        mode: count or enumerate
        sink: Match receiver for enumerate mode (in-memory lists by default)
        context: Book-keeping context to use; left empty on return

    Returns:
        MatchResult with the motif's count and search statistics
    """
    result = MatchResult.empty([m.name], mode, collect=sink is None)
    search = _Search(g, delta, result, mode, sink, context)
    ctx = search.ctx
    src, dst = g.src_list, g.dst_list
    edges = m.edges
    size = len(edges)
    stats = search.stats

    def match_edge(rank: int) -> None:
        if rank == size:
            search.emit(m.name)
            return
        motif_edge = edges[rank]
        u_m, v_m = motif_edge
        for e in search.candidates(rank, u_m):
            stats.visits += 1
            if check_candidate(ctx, g, e, motif_edge, rank, delta) is not Verdict.ACCEPT:
                continue
            stats.expansions += 1
            ctx.e_stack.append(e)
            roll_on_edge(ctx, u_m, v_m, src[e], dst[e])
            match_edge(rank + 1)
            ctx.e_stack.pop()
            roll_back_edge(ctx, src[e], dst[e])

    match_edge(0)
    stats.node_visits[m.name] += stats.visits
    logger.debug("mine_single %s: %d matches, %d visits", m.name, result.counts[m.name], stats.visits)
    return result


def co_mine(
    g: TemporalGraph,
    t: MGTree,
    delta: int,
    mode: Mode = Mode.COUNT,
    sink: MatchSink | None = None,
    context: MatchContext | None = None,
) -> MatchResult:
    """Mine every motif of an MG-Tree in one shared search.

    A node's own matches are emitted before its children are explored with
    the node's match as their partial match; then the search resumes looking
    for further matches of the node.
    """
    result = MatchResult.empty([m.name for m in t.motifs], mode, collect=sink is None)
    search = _Search(g, delta, result, mode, sink, context)
    ctx = search.ctx
    src, dst = g.src_list, g.dst_list
    stats = search.stats
    node_visits = stats.node_visits

    def co_match_edge(node: MGNode, rank: int) -> None:
        common = node.common
        if rank == len(common):
            if node.query_ref is not None:
                search.emit(node.query_ref.name)
            for child in node.children:
                co_match_edge(child, rank)
            return
        motif_edge = common[rank]
        u_m, v_m = motif_edge
        label = node.label
        for e in search.candidates(rank, u_m):
            stats.visits += 1
            node_visits[label] += 1
            if check_candidate(ctx, g, e, motif_edge, rank, delta) is not Verdict.ACCEPT:
                continue
            stats.expansions += 1
            ctx.e_stack.append(e)
            roll_on_edge(ctx, u_m, v_m, src[e], dst[e])
            co_match_edge(node, rank + 1)
            ctx.e_stack.pop()
            roll_back_edge(ctx, src[e], dst[e])

    co_match_edge(t.root, 0)
    logger.debug("co_mine: %d matches over %d motifs, %d visits", result.total, len(t.motifs), stats.visits)
    return result


def mine_individually(
    g: TemporalGraph,
    motifs: Sequence[Motif],
    delta: int,
    mode: Mode = Mode.COUNT,
    sink: MatchSink | None = None,
) -> MatchResult:
    """Baseline multi-query execution: one independent search per motif."""
    result = MatchResult.empty([m.name for m in motifs], mode, collect=sink is None)
    for m in motifs:
        result.merge(mine_single(g, m, delta, mode, sink))
    return result
