"""Motif-Group Tree (MG-Tree) construction and analysis.

Each node holds a common edge prefix shared by all motifs below it. Motifs
are grouped rank by rank on their next edge; a group that is not split keeps
extending the same node, a group that splits hands each subgroup to a child.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import TreeError
from .graph import TemporalGraph, detect_bipartite
from .motif import Edge, Motif
from .validation import QueryValidator

logger = logging.getLogger(__name__)

DEFAULT_SM_THRESHOLD = 0.44

Gid = int | str


@dataclass(eq=False)
class MGNode:
    """A node of the MG-Tree.

    Attributes:
        gid: Sequential integer for grouping nodes, motif name for singleton leaves
        common: Edge prefix shared by every motif below this node (may be empty at the root)
        children: Child nodes, in order of first grouping
        query_ref: Query motif whose edges equal ``common``, if any
    """

    gid: Gid
    common: tuple[Edge, ...]
    children: list[MGNode] = field(default_factory=list)
    query_ref: Motif | None = None
    parent: MGNode | None = field(default=None, repr=False)

    @property
    def depth(self) -> int:
        return len(self.common)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def label(self) -> str:
        return f"I{self.gid}" if isinstance(self.gid, int) else self.gid

    def add_child(self, child: MGNode) -> None:
        child.parent = self
        self.children.append(child)


@dataclass
class MGTree:
    """MG-Tree over a motif group."""

    root: MGNode
    motifs: tuple[Motif, ...]

    @property
    def leaves(self) -> tuple[Motif, ...]:
        return self.motifs

    def iter_nodes(self) -> Iterator[MGNode]:
        """Preorder traversal in child order."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    @property
    def depth(self) -> int:
        return max(node.depth for node in self.iter_nodes())

    def node_by_gid(self, gid: Gid) -> MGNode:
        for node in self.iter_nodes():
            if node.gid == gid:
                return node
        raise KeyError(gid)

    def query_nodes(self) -> dict[str, MGNode]:
        return {node.query_ref.name: node for node in self.iter_nodes() if node.query_ref is not None}


def construct_mg_tree(mg: Sequence[Motif]) -> MGTree:
    """Build the MG-Tree of a group of unique canonical motifs.

    Raises:
        TreeError: If the group is empty, contains duplicates or uses a
            grouping-node label as a motif name
    """
    if not mg:
        raise TreeError("motif group is empty")
    seen: dict[tuple[Edge, ...], str] = {}
    for m in mg:
        if QueryValidator.RESERVED_NAME_PATTERN.match(m.name):
            raise TreeError(f"motif name {m.name!r} clashes with grouping-node labels")
        if m.edges in seen:
            raise TreeError(f"motifs {seen[m.edges]!r} and {m.name!r} are identical")
        seen[m.edges] = m.name

    next_gid = 0

    def new_gid() -> int:
        nonlocal next_gid
        next_gid += 1
        return next_gid

    def leaf(m: Motif) -> MGNode:
        return MGNode(gid=m.name, common=m.edges, query_ref=m)

    def create(group: list[Motif], depth: int, gid: int) -> MGNode:
        # Extend the prefix while the group stays together
        while all(len(m) > depth for m in group) and len({m.edges[depth] for m in group}) == 1:
            depth += 1
        node = MGNode(gid=gid, common=group[0].prefix(depth))

        edge_groups: dict[Edge, list[Motif]] = {}
        for m in group:
            if len(m) == depth:
                node.query_ref = m
            else:
                edge_groups.setdefault(m.edges[depth], []).append(m)

        for child_group in edge_groups.values():
            if len(child_group) == 1:
                node.add_child(leaf(child_group[0]))
            else:
                node.add_child(create(child_group, depth + 1, new_gid()))
        return node

    group = list(mg)
    root = leaf(group[0]) if len(group) == 1 else create(group, 0, new_gid())
    tree = MGTree(root=root, motifs=tuple(group))
    logger.debug("Built MG-Tree with %d nodes for %d motifs", tree.node_count, len(group))
    return tree


def validate_tree(t: MGTree, mg: Sequence[Motif]) -> list[str]:
    """Check the tree invariants and coverage of ``mg``. Empty list means valid."""
    violations: list[str] = []
    gids: Counter[Gid] = Counter()
    labels: Counter[str] = Counter()
    covered: Counter[str] = Counter()

    for node in t.iter_nodes():
        gids[node.gid] += 1
        labels[node.label] += 1
        if node.query_ref is not None:
            covered[node.query_ref.name] += 1
            if node.query_ref.edges != node.common:
                violations.append(f"node {node.label}: query_ref {node.query_ref.name!r} differs from common prefix")
        elif node.is_leaf:
            violations.append(f"node {node.label}: leaf without query_ref")

        extensions: set[Edge] = set()
        for child in node.children:
            if child.depth <= node.depth:
                violations.append(f"node {child.label}: common not longer than parent {node.label}")
                continue
            for rank, (mine, theirs) in enumerate(zip(node.common, child.common), start=1):
                if mine != theirs:
                    violations.append(f"node {child.label}: prefix mismatch with {node.label} at edge rank {rank}")
                    break
            ext = child.common[node.depth]
            if ext in extensions:
                violations.append(f"node {node.label}: duplicate child extension edge {ext}")
            extensions.add(ext)

    for gid, count in gids.items():
        if count > 1:
            violations.append(f"gid {gid!r} used by {count} nodes")
    for label, count in labels.items():
        if count > 1:
            violations.append(f"label {label!r} used by {count} nodes")

    expected = {m.name: m for m in mg}
    for name in expected:
        if covered[name] == 0:
            violations.append(f"motif {name!r} not covered by any node")
        elif covered[name] > 1:
            violations.append(f"motif {name!r} covered {covered[name]} times")
    for name in covered:
        if name not in expected:
            violations.append(f"node references unknown motif {name!r}")
    by_name = t.query_nodes()
    for name, m in expected.items():
        node = by_name.get(name)
        if node is not None and node.query_ref is not None and node.query_ref.edges != m.edges:
            violations.append(f"motif {name!r} edges differ from the group")
    return violations


def similarity_metric(mg: Sequence[Motif], t: MGTree) -> float:
    """1 - (sum of per-node incremental edges) / (sum of motif edges).

    The root counts against a zero-edge parent.
    """
    total = sum(len(m) for m in mg)
    if total == 0:
        return 0.0
    incremental = sum(node.depth - (node.parent.depth if node.parent else 0) for node in t.iter_nodes())
    return float(1 - Fraction(incremental, total))


class Choice(Enum):
    """Outcome of the co-mining heuristic."""

    CO_MINE = "co_mine"
    MINE_INDIVIDUALLY = "mine_individually"


@dataclass
class Decision:
    """Heuristic decision with its advisory inputs."""

    choice: Choice
    reasons: list[str]
    sm: float
    bipartite: bool
    delta: int
    time_span: int
    threshold: float = DEFAULT_SM_THRESHOLD

    @property
    def delta_ratio(self) -> float | None:
        return self.delta / self.time_span if self.time_span else None

    @property
    def co_mine(self) -> bool:
        return self.choice is Choice.CO_MINE

    def to_dict(self) -> dict[str, object]:
        return {
            "decision": self.choice.value,
            "reasons": list(self.reasons),
            "sm": self.sm,
            "sm_threshold": self.threshold,
            "bipartite": self.bipartite,
            "delta": self.delta,
            "time_span": self.time_span,
            "delta_ratio": self.delta_ratio,
        }


def co_mining_heuristic(
    g: TemporalGraph,
    mg: Sequence[Motif],
    t: MGTree,
    delta: int,
    threshold: float = DEFAULT_SM_THRESHOLD,
) -> Decision:
    """Decide between co-mining and mining each motif on its own.

    Co-mine when the graph is bipartite, otherwise when SM >= threshold.
    Delta relative to the graph's time span is reported but not decisive.
    """
    sm = similarity_metric(mg, t)
    bipartite = detect_bipartite(g) is not None
    span = int(g.t[-1] - g.t[0]) if g.num_edges else 0
    reasons: list[str] = []
    if bipartite:
        choice = Choice.CO_MINE
        reasons.append("graph is bipartite: intra-partition prefixes prune whole subtrees")
    elif sm >= threshold:
        choice = Choice.CO_MINE
        reasons.append(f"similarity {sm:.4f} >= {threshold}")
    else:
        choice = Choice.MINE_INDIVIDUALLY
        reasons.append(f"similarity {sm:.4f} < {threshold} on a non-bipartite graph")
    decision = Decision(choice, reasons, sm, bipartite, delta, span, threshold)
    logger.info("Co-mining decision: %s (sm=%.4f, bipartite=%s)", choice.value, sm, bipartite)
    return decision


@dataclass(frozen=True)
class TreeDump:
    """Text renderings of an MG-Tree."""

    outline: str
    dot: str


def _format_common(common: tuple[Edge, ...]) -> str:
    if not common:
        return "ε"
    return "(" + ", ".join(f"{u}->{v}" for u, v in common) + ")"


def _node_line(node: MGNode) -> str:
    line = f"{node.label}: {_format_common(node.common)}"
    if node.query_ref is not None and node.label != node.query_ref.name:
        line += f" [query {node.query_ref.name}]"
    return line


def dump_tree(t: MGTree) -> TreeDump:
    """Render the tree as an indented outline and as a DOT digraph."""
    lines: list[str] = []

    def walk(node: MGNode, indent: int) -> None:
        lines.append("  " * indent + _node_line(node))
        for child in node.children:
            walk(child, indent + 1)

    walk(t.root, 0)

    dot = ["digraph mgtree {", "  node [shape=box];"]
    for node in t.iter_nodes():
        shape = ', style="rounded"' if node.query_ref is not None else ""
        label = _node_line(node).replace('"', '\\"')
        dot.append(f'  "{node.label}" [label="{label}"{shape}];')
    for node in t.iter_nodes():
        for child in node.children:
            dot.append(f'  "{node.label}" -> "{child.label}";')
    dot.append("}")
    return TreeDump(outline="\n".join(lines), dot="\n".join(dot) + "\n")
