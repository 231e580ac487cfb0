"""Specialized traversal plans and their resumable interpreter.

``specialize_plan`` unrolls an MG-Tree into a step table: one step per motif
edge of every node, with the candidate source and destination check worked
out ahead of time from the motif structure. ``PlanExecutor`` runs the table
iteratively over an explicit stack of ``Level`` records, so a search can be
stopped after any number of candidate visits, serialized, split between
workers and resumed.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

from .graph import TemporalGraph
from .mgtree import MGNode, MGTree
from .miner import ListSink, MatchContext, MatchResult, MatchSink, SearchStats, roll_back_edge, roll_on_edge
from .motif import Edge, Mode

logger = logging.getLogger(__name__)

NO_EDGE = -1
GLOBAL = -1


class Source(Enum):
    """Where the candidates of a step come from."""

    ALL = "all"
    ADJACENCY = "adjacency"


class DstCheck(Enum):
    """Constraint on the destination of a candidate."""

    EQUAL = "equal"
    INJECT = "inject"


@dataclass(frozen=True)
class PlanStep:
    """One motif edge of a node, with its precomputed constraints.

    ``source`` is ADJACENCY when the motif source vertex is already mapped by
    an earlier edge; the scan then walks its out-edges. Otherwise all edges
    are scanned and the graph source must be unmapped. ``dst_check`` is EQUAL
    when the motif destination is already mapped.
    """

    rank: int
    edge: Edge
    source: Source
    dst_check: DstCheck
    completes: bool

    def describe(self) -> str:
        u, v = self.edge
        scan = "scan all edges" if self.source is Source.ALL else f"adjacency({u})"
        check = f"dst == {v}" if self.dst_check is DstCheck.EQUAL else "dst fresh"
        return f"rank {self.rank}: {scan} for {u}->{v}, {check}"


@dataclass(frozen=True)
class NodePlan:
    """Steps of one MG-Tree node: ranks ``start`` .. ``start + len(steps) - 1``."""

    index: int
    label: str
    start: int
    steps: tuple[PlanStep, ...]
    query: str | None
    children: tuple[int, ...]

    @property
    def end(self) -> int:
        return self.start + len(self.steps)

    def step(self, rank: int) -> PlanStep:
        return self.steps[rank - self.start]


@dataclass(frozen=True)
class TraversalPlan:
    """Step table of an MG-Tree; ``nodes[0]`` is the root."""

    nodes: tuple[NodePlan, ...]
    motif_names: tuple[str, ...]
    depth: int

    @property
    def root(self) -> NodePlan:
        return self.nodes[0]

    def branch_points(self) -> dict[int, list[str]]:
        """Depth at which children start -> child labels, for every branching node."""
        table: dict[int, list[str]] = {}
        for node in self.nodes:
            if len(node.children) > 1:
                table.setdefault(node.end, []).extend(self.nodes[c].label for c in node.children)
        return table

    def describe(self) -> str:
        lines = []
        for node in self.nodes:
            children = ", ".join(self.nodes[c].label for c in node.children) or "-"
            emit = f" emit {node.query}" if node.query else ""
            lines.append(f"{node.label} ranks [{node.start}, {node.end}){emit} children: {children}")
            lines.extend(f"  {step.describe()}" for step in node.steps)
        return "\n".join(lines)


def specialize_plan(t: MGTree) -> TraversalPlan:
    """Unroll an MG-Tree into a step table in preorder (children in tree order)."""
    nodes: list[NodePlan] = []

    def visit(node: MGNode, start: int) -> int:
        index = len(nodes)
        nodes.append(None)  # type: ignore[arg-type]
        mapped = {v for edge in node.common[:start] for v in edge}
        steps = []
        for rank in range(start, node.depth):
            u, v = node.common[rank]
            steps.append(
                PlanStep(
                    rank=rank,
                    edge=(u, v),
                    source=Source.ADJACENCY if u in mapped else Source.ALL,
                    dst_check=DstCheck.EQUAL if v in mapped else DstCheck.INJECT,
                    completes=rank == node.depth - 1,
                )
            )
            mapped.update((u, v))
        children = tuple(visit(child, node.depth) for child in node.children)
        nodes[index] = NodePlan(
            index=index,
            label=node.label,
            start=start,
            steps=tuple(steps),
            query=node.query_ref.name if node.query_ref is not None else None,
            children=children,
        )
        return index

    visit(t.root, 0)
    plan = TraversalPlan(nodes=tuple(nodes), motif_names=tuple(m.name for m in t.motifs), depth=t.depth)
    logger.debug("Specialized plan: %d nodes, depth %d", len(plan.nodes), plan.depth)
    return plan


@dataclass(slots=True)
class Level:
    """One depth of a suspended search.

    Attributes:
        node: Plan node index whose step is scanned at this depth
        rank: Motif edge rank of this depth
        source: GLOBAL for a scan over edge ids, else the graph vertex whose out-edges are scanned
        lo, hi: Remaining candidate positions [lo, hi)
        chosen: Edge on the current match path from this depth (the search-tree edge), NO_EDGE if none
        pending: Sibling plan nodes still to be explored at this depth once the current one is done
    """

    node: int
    rank: int
    source: int
    lo: int
    hi: int
    chosen: int = NO_EDGE
    pending: list[int] = field(default_factory=list)

    @property
    def remaining(self) -> int:
        return max(0, self.hi - self.lo)

    def pinned(self) -> Level:
        """Copy that keeps the path edge but owns no further work."""
        return Level(self.node, self.rank, self.source, self.hi, self.hi, self.chosen, [])

    def to_dict(self) -> dict[str, object]:
        return {
            "node": self.node,
            "rank": self.rank,
            "source": self.source,
            "lo": self.lo,
            "hi": self.hi,
            "chosen": self.chosen,
            "pending": list(self.pending),
        }

    @classmethod
    def from_dict(cls, data: dict[str, object]) -> Level:
        return cls(
            node=int(data["node"]),  # type: ignore[call-overload]
            rank=int(data["rank"]),  # type: ignore[call-overload]
            source=int(data["source"]),  # type: ignore[call-overload]
            lo=int(data["lo"]),  # type: ignore[call-overload]
            hi=int(data["hi"]),  # type: ignore[call-overload]
            chosen=int(data["chosen"]),  # type: ignore[call-overload]
            pending=[int(x) for x in data["pending"]],  # type: ignore[attr-defined]
        )


@dataclass
class SearchContext:
    """A transferable, partially explored search.

    Levels below the top hold the current match path in ``chosen``; the top
    level is the one being scanned. ``chunk`` is the root-candidate window
    the context was created for.
    """

    levels: list[Level]
    chunk: tuple[int, int]

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def node(self) -> int | None:
        return self.levels[-1].node if self.levels else None

    @property
    def e_stack(self) -> list[int]:
        return [level.chosen for level in self.levels if level.chosen != NO_EDGE]

    @property
    def skip_markers(self) -> dict[int, int]:
        """Depth -> search-tree edge that this context holds but never rescans."""
        return {i: level.chosen for i, level in enumerate(self.levels) if level.chosen != NO_EDGE}

    @property
    def exhausted(self) -> bool:
        return all(level.lo >= level.hi and not level.pending for level in self.levels)

    @property
    def remaining(self) -> int:
        return sum(level.remaining for level in self.levels)

    def to_dict(self) -> dict[str, object]:
        return {"chunk": list(self.chunk), "levels": [level.to_dict() for level in self.levels]}

    @classmethod
    def from_dict(cls, data: dict[str, object]) -> SearchContext:
        lo, hi = data["chunk"]  # type: ignore[misc]
        return cls(levels=[Level.from_dict(x) for x in data["levels"]], chunk=(int(lo), int(hi)))  # type: ignore[attr-defined]


class PlanExecutor:
    """Interprets a TraversalPlan over one graph; one executor per worker.

    Results, statistics and the sink are private to the executor. Contexts
    can be moved between executors of the same plan and graph.
    """

    def __init__(
        self,
        plan: TraversalPlan,
        g: TemporalGraph,
        delta: int,
        mode: Mode = Mode.COUNT,
        sink: MatchSink | None = None,
    ) -> None:
        self.plan = plan
        self.g = g
        self.delta = delta
        self.mode = mode
        self.result = MatchResult.empty(plan.motif_names, mode, collect=sink is None)
        self.stats: SearchStats = self.result.stats
        if mode is Mode.ENUMERATE:
            self.sink: MatchSink | None = sink if sink is not None else ListSink(self.result.matches)
        else:
            self.sink = None

    def root_context(self, chunk: tuple[int, int] | None = None) -> SearchContext:
        """Context scanning root candidates ``chunk`` (all edges by default)."""
        if chunk is None:
            chunk = (0, self.g.num_edges)
        root = self.plan.root
        if root.steps:
            first, pending = root.index, []
        else:
            first, pending = root.children[0], list(root.children[1:])
        level = self.fresh_level(first, 0, MatchContext(), chunk, pending)
        return SearchContext(levels=[level], chunk=chunk)

    def match_context_for(self, levels: Sequence[Level]) -> MatchContext:
        """Rebuild the book-keeping context by replaying the path edges."""
        mctx = MatchContext()
        src, dst = self.g.src_list, self.g.dst_list
        nodes = self.plan.nodes
        for level in levels:
            e = level.chosen
            if e == NO_EDGE:
                continue
            u_m, v_m = nodes[level.node].step(level.rank).edge
            mctx.e_stack.append(e)
            roll_on_edge(mctx, u_m, v_m, src[e], dst[e])
        return mctx

    def fresh_level(
        self,
        node: int,
        rank: int,
        mctx: MatchContext,
        chunk: tuple[int, int],
        pending: list[int] | None = None,
    ) -> Level:
        """Level for ``rank`` of ``node`` with its full candidate range under partial match ``mctx``."""
        pending = pending if pending is not None else []
        if rank == 0:
            return Level(node, 0, GLOBAL, chunk[0], chunk[1], NO_EDGE, pending)
        g = self.g
        step = self.plan.nodes[node].step(rank)
        stack = mctx.e_stack
        t_max = g.t_list[stack[0]] + self.delta
        if step.source is Source.ALL:
            lo, hi = g.global_range(stack[-1], t_max)
            return Level(node, rank, GLOBAL, lo, hi, NO_EDGE, pending)
        u_g = mctx.m2g[step.edge[0]]
        lo, hi = g.out_range(u_g, stack[-1], t_max)
        return Level(node, rank, u_g, lo, hi, NO_EDGE, pending)

    def branch(self, ctx: SearchContext, depth: int, node: int, lo: int | None = None, hi: int | None = None) -> SearchContext:
        """New context sharing the path above ``depth`` and scanning ``node`` at that depth.

        ``lo``/``hi`` restrict the candidate range; by default it is generated
        from the shared path.
        """
        pinned = [level.pinned() for level in ctx.levels[:depth]]
        level = self.fresh_level(node, ctx.levels[depth].rank, self.match_context_for(pinned), ctx.chunk)
        if lo is not None:
            level.lo = lo
        if hi is not None:
            level.hi = hi
        return SearchContext(levels=[*pinned, level], chunk=ctx.chunk)

    def run(self, ctx: SearchContext, budget: int | None = None) -> bool:
        """Advance ``ctx`` by at most ``budget`` candidate visits.

        Returns:
            True once the context is fully explored, False if the budget ran out
        """
        levels = ctx.levels
        g = self.g
        src, dst, out_ids = g.src_list, g.dst_list, g.out_ids
        nodes = self.plan.nodes
        stats = self.stats
        node_visits = stats.node_visits
        result = self.result
        sink = self.sink
        mctx = self.match_context_for(levels)
        m2g, g2m, stack = mctx.m2g, mctx.g2m, mctx.e_stack
        limit = stats.visits + budget if budget is not None else None

        while levels:
            if limit is not None and stats.visits >= limit:
                return False
            top = levels[-1]
            if top.lo >= top.hi:
                if top.pending:
                    sibling = top.pending.pop(0)
                    levels[-1] = self.fresh_level(sibling, top.rank, mctx, ctx.chunk, top.pending)
                    continue
                levels.pop()
                if levels:
                    parent = levels[-1]
                    e = parent.chosen
                    stack.pop()
                    roll_back_edge(mctx, src[e], dst[e])
                    parent.chosen = NO_EDGE
                continue

            pos = top.lo
            top.lo = pos + 1
            e = pos if top.source == GLOBAL else out_ids[top.source][pos]
            node = nodes[top.node]
            step = node.steps[top.rank - node.start]
            stats.visits += 1
            node_visits[node.label] += 1

            u_g = src[e]
            v_g = dst[e]
            if u_g == v_g:
                continue
            if step.source is Source.ALL and u_g in g2m:
                continue
            if step.dst_check is DstCheck.EQUAL:
                if m2g[step.edge[1]] != v_g:
                    continue
            elif v_g in g2m:
                continue

            stats.expansions += 1
            top.chosen = e
            stack.append(e)
            roll_on_edge(mctx, step.edge[0], step.edge[1], u_g, v_g)
            if not step.completes:
                levels.append(self.fresh_level(top.node, top.rank + 1, mctx, ctx.chunk))
                continue
            if node.query is not None:
                result.counts[node.query] += 1
                stats.matches += 1
                if sink is not None:
                    sink.emit(node.query, stack)
            if node.children:
                levels.append(
                    self.fresh_level(node.children[0], top.rank + 1, mctx, ctx.chunk, list(node.children[1:]))
                )
            else:
                stack.pop()
                roll_back_edge(mctx, u_g, v_g)
                top.chosen = NO_EDGE

        if not mctx.is_empty:
            raise AssertionError("match context not empty after a finished search")
        return True


def execute_plan(
    p: TraversalPlan,
    g: TemporalGraph,
    delta: int,
    mode: Mode = Mode.COUNT,
    sink: MatchSink | None = None,
) -> MatchResult:
    """Run a plan over the whole graph in the calling thread."""
    executor = PlanExecutor(p, g, delta, mode, sink)
    executor.run(executor.root_context())
    return executor.result
