"""Temporal graph loading and indexing.

Edges are stably sorted by (timestamp, input rank) and receive dense ids in
that order, so edge-id order is the total temporal order used everywhere
else. Out-edges of each vertex are kept in a CSR-like index whose ranges are
sorted by id (and therefore by timestamp).
"""

from __future__ import annotations

import logging
import re
from bisect import bisect_right
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np

from .errors import GraphFormatError

logger = logging.getLogger(__name__)

Triple = tuple[int, int, int]

INDEX_MAGIC = b"TCMIDX"
INDEX_VERSION = 1

_FIELD_SPLIT = re.compile(r"[,\s]+")
_SCALE_HEADER = re.compile(r"^#\s*scale\s+(\S+)\s*$", re.IGNORECASE)


@dataclass(frozen=True, slots=True)
class TemporalEdge:
    """A directed timestamped edge. ``id`` is its rank in the total temporal order."""

    id: int
    src: int
    dst: int
    t: int


@dataclass(frozen=True)
class EdgeList:
    """Result of parsing an edge-list file.

    Attributes:
        triples: (src, dst, t) in input order, vertex ids already dense
        labels: original vertex label for every dense id
        scale: decimal scaling power declared by the ``#scale`` header
    """

    triples: list[Triple]
    labels: list[str]
    scale: int = 0


@dataclass(frozen=True, eq=False)
class TemporalGraph:
    """Immutable indexed temporal graph.

    Attributes:
        num_vertices: Number of vertices (ids are 0..num_vertices-1)
        src, dst, t: Per-edge arrays indexed by edge id
        indptr: CSR offsets into ``out_edges`` per source vertex
        out_edges: Edge ids grouped by source, ascending within each group
        labels: Original vertex labels
        scale: Decimal scaling power of the timestamps
    """

    num_vertices: int
    src: np.ndarray
    dst: np.ndarray
    t: np.ndarray
    indptr: np.ndarray
    out_edges: np.ndarray
    labels: tuple[str, ...] = ()
    scale: int = 0

    @property
    def num_edges(self) -> int:
        return int(self.t.shape[0])

    @property
    def timestamps(self) -> np.ndarray:
        return self.t

    @cached_property
    def edges(self) -> tuple[TemporalEdge, ...]:
        return tuple(
            TemporalEdge(i, s, d, t) for i, (s, d, t) in enumerate(zip(self.src_list, self.dst_list, self.t_list))
        )

    def out_index(self, u: int) -> np.ndarray:
        """Edge ids of the out-edges of ``u`` in temporal order."""
        return self.out_edges[self.indptr[u] : self.indptr[u + 1]]

    def label(self, v: int) -> str:
        return self.labels[v] if v < len(self.labels) else str(v)

    # Plain-list views for the search loops; list indexing and bisect are
    # much faster than numpy scalar access one element at a time.

    @cached_property
    def src_list(self) -> list[int]:
        return self.src.tolist()

    @cached_property
    def dst_list(self) -> list[int]:
        return self.dst.tolist()

    @cached_property
    def t_list(self) -> list[int]:
        return self.t.tolist()

    @cached_property
    def out_ids(self) -> list[list[int]]:
        flat = self.out_edges.tolist()
        bounds = self.indptr.tolist()
        return [flat[bounds[u] : bounds[u + 1]] for u in range(self.num_vertices)]

    @cached_property
    def out_times(self) -> list[list[int]]:
        t = self.t_list
        return [[t[e] for e in ids] for ids in self.out_ids]

    def out_range(self, u: int, after_id: int, t_max: int) -> tuple[int, int]:
        """Positions [lo, hi) in ``out_ids[u]`` with id > after_id and t <= t_max."""
        lo = bisect_right(self.out_ids[u], after_id)
        hi = bisect_right(self.out_times[u], t_max)
        return lo, max(lo, hi)

    def global_range(self, after_id: int, t_max: int) -> tuple[int, int]:
        """Edge ids [lo, hi) with id > after_id and t <= t_max."""
        lo = after_id + 1
        hi = bisect_right(self.t_list, t_max)
        return lo, max(lo, hi)

    def warm(self) -> TemporalGraph:
        """Materialize the list views before sharing across threads."""
        _ = self.src_list, self.dst_list, self.t_list, self.out_times
        return self


@dataclass(frozen=True)
class BipartitePartition:
    """Side label (0 or 1) for every vertex of a bipartite graph."""

    assignment: tuple[int, ...]

    def side(self, v: int) -> int:
        return self.assignment[v]

    def same_side(self, u: int, v: int) -> bool:
        return self.assignment[u] == self.assignment[v]


@dataclass(frozen=True)
class GraphSummary:
    """Dataset characterization of a temporal graph."""

    vertices: int
    temporal_edges: int
    static_edges: int
    time_span: int
    self_loops: int
    duplicate_timestamps: int

    def to_dict(self) -> dict[str, int]:
        return {
            "vertices": self.vertices,
            "temporal_edges": self.temporal_edges,
            "static_edges": self.static_edges,
            "time_span": self.time_span,
            "self_loops": self.self_loops,
            "duplicate_timestamps": self.duplicate_timestamps,
        }


def _parse_timestamp(token: str, scale: int, line: int) -> int:
    try:
        value = Decimal(token)
    except InvalidOperation:
        raise GraphFormatError(f"timestamp {token!r} is not a number", line) from None
    if not value.is_finite():
        raise GraphFormatError(f"timestamp {token!r} is not finite", line)
    scaled = value.scaleb(scale)
    if scale == 0 and scaled != scaled.to_integral_value():
        raise GraphFormatError(f"non-integer timestamp {token!r}; declare '#scale <k>' for decimal times", line)
    return int(scaled.quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


def parse_edge_list(stream: str | Iterable[str]) -> EdgeList:
    """Parse an edge-list text stream.

    Each non-empty, non-comment line holds ``src dst t`` separated by
    whitespace or commas. Vertex tokens, numeric or not, are interned to dense
    ids in order of first appearance; ``labels`` maps each id back to its token.

    Args:
        stream: Text, or lines of text (a file object works)

    Returns:
        EdgeList with triples in input order

    Raises:
        GraphFormatError: On a malformed line, naming its line number
    """
    if isinstance(stream, str):
        stream = stream.splitlines()
    scale = 0
    rows: list[tuple[str, str, int]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = _SCALE_HEADER.match(line)
            if header:
                if rows:
                    raise GraphFormatError("'#scale' header must precede all edges", lineno)
                try:
                    scale = int(header.group(1))
                except ValueError:
                    raise GraphFormatError(f"invalid scale {header.group(1)!r}", lineno) from None
                if not 0 <= scale <= 18:
                    raise GraphFormatError("scale must be a power of ten between 0 and 18", lineno)
            continue
        fields = [f for f in _FIELD_SPLIT.split(line) if f]
        if len(fields) != 3:
            raise GraphFormatError(f"expected 3 fields, got {len(fields)}", lineno)
        src, dst, ts = fields
        rows.append((src, dst, _parse_timestamp(ts, scale, lineno)))

    ids: dict[str, int] = {}
    triples: list[Triple] = []
    for s, d, t in rows:
        su = ids.setdefault(s, len(ids))
        dv = ids.setdefault(d, len(ids))
        triples.append((su, dv, t))
    return EdgeList(triples=triples, labels=list(ids), scale=scale)


def build_indexed_graph(
    triples: Sequence[Triple],
    labels: Sequence[str] | None = None,
    scale: int = 0,
) -> TemporalGraph:
    """Sort edges by (t, input rank), assign dense ids and build the out-index.

    Duplicate timestamps are kept; input rank breaks the tie.
    """
    if triples:
        data = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    else:
        data = np.empty((0, 3), dtype=np.int64)
    order = np.argsort(data[:, 2], kind="stable")
    src = np.ascontiguousarray(data[order, 0])
    dst = np.ascontiguousarray(data[order, 1])
    t = np.ascontiguousarray(data[order, 2])

    if src.size and (src.min() < 0 or dst.min() < 0):
        raise GraphFormatError("vertex ids must be nonnegative")
    top = int(max(src.max(), dst.max())) + 1 if src.size else 0
    num_vertices = max(top, len(labels) if labels is not None else 0)

    # Stable sort by source keeps ascending edge ids inside each group
    out_edges = np.argsort(src, kind="stable").astype(np.int64)
    counts = np.bincount(src, minlength=num_vertices) if num_vertices else np.zeros(0, dtype=np.int64)
    indptr = np.zeros(num_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])

    duplicates = int(np.count_nonzero(np.diff(t) == 0)) if t.size > 1 else 0
    if duplicates:
        logger.warning("%d edges share a timestamp with their predecessor; ordering ties by input rank", duplicates)
    logger.debug("Indexed graph: %d vertices, %d edges", num_vertices, t.size)

    return TemporalGraph(
        num_vertices=num_vertices,
        src=src,
        dst=dst,
        t=t,
        indptr=indptr,
        out_edges=out_edges,
        labels=tuple(labels) if labels is not None else tuple(str(v) for v in range(num_vertices)),
        scale=scale,
    )


def load_graph(path: str | Path) -> TemporalGraph:
    """Read an edge-list file (or a binary index cache ending in .npz)."""
    path = Path(path)
    if path.suffix == ".npz":
        return load_index(path)
    with open(path, encoding="utf-8") as f:
        parsed = parse_edge_list(f)
    graph = build_indexed_graph(parsed.triples, parsed.labels, parsed.scale)
    logger.info("Loaded %s: %d vertices, %d edges", path, graph.num_vertices, graph.num_edges)
    return graph


def neighbors_after(g: TemporalGraph, u: int, t_min: int, t_max: int) -> list[int]:
    """Out-edges of ``u`` with t_min < t <= t_max, in temporal order."""
    if t_min > t_max:
        raise ValueError(f"t_min ({t_min}) must not exceed t_max ({t_max})")
    times = g.out_times[u]
    lo = bisect_right(times, t_min)
    hi = bisect_right(times, t_max)
    return g.out_ids[u][lo:hi]


def neighbors_after_edge(g: TemporalGraph, u: int, after_id: int, t_max: int) -> list[int]:
    """Out-edges of ``u`` later than edge ``after_id`` in the total order, with t <= t_max."""
    lo, hi = g.out_range(u, after_id, t_max)
    return g.out_ids[u][lo:hi]


def edges_after(g: TemporalGraph, after_id: int, t_max: int) -> range:
    """All edges later than ``after_id`` in the total order, with t <= t_max."""
    lo, hi = g.global_range(after_id, t_max)
    return range(lo, hi)


def detect_bipartite(g: TemporalGraph) -> BipartitePartition | None:
    """2-color the undirected projection; None if an odd cycle (or self-loop) exists."""
    projection = nx.Graph()
    projection.add_nodes_from(range(g.num_vertices))
    projection.add_edges_from(zip(g.src_list, g.dst_list))
    try:
        coloring = nx.bipartite.color(projection)
    except nx.NetworkXError:
        return None
    return BipartitePartition(tuple(int(coloring[v]) for v in range(g.num_vertices)))


def graph_summary(g: TemporalGraph) -> GraphSummary:
    """Vertex/edge counts, static edge count and time span."""
    static = len(set(zip(g.src_list, g.dst_list)))
    span = int(g.t[-1] - g.t[0]) if g.num_edges else 0
    return GraphSummary(
        vertices=g.num_vertices,
        temporal_edges=g.num_edges,
        static_edges=static,
        time_span=span,
        self_loops=int(np.count_nonzero(g.src == g.dst)),
        duplicate_timestamps=int(np.count_nonzero(np.diff(g.t) == 0)) if g.num_edges > 1 else 0,
    )


def save_index(g: TemporalGraph, path: str | Path) -> None:
    """Write the built index to a versioned ``.npz`` cache."""
    np.savez_compressed(
        Path(path),
        magic=np.frombuffer(INDEX_MAGIC, dtype=np.uint8),
        version=np.array([INDEX_VERSION], dtype=np.int64),
        meta=np.array([g.num_vertices, g.scale], dtype=np.int64),
        src=g.src,
        dst=g.dst,
        t=g.t,
        indptr=g.indptr,
        out_edges=g.out_edges,
        labels=np.array(g.labels, dtype=np.str_),
    )


def load_index(path: str | Path) -> TemporalGraph:
    """Read a cache written by :func:`save_index`.

    Raises:
        GraphFormatError: If the magic header or the version does not match
    """
    with np.load(Path(path), allow_pickle=False) as data:
        if "magic" not in data or data["magic"].tobytes() != INDEX_MAGIC:
            raise GraphFormatError(f"{path} is not a temporal graph index cache")
        version = int(data["version"][0])
        if version != INDEX_VERSION:
            raise GraphFormatError(f"index cache version {version} unsupported (expected {INDEX_VERSION})")
        num_vertices, scale = (int(x) for x in data["meta"])
        return TemporalGraph(
            num_vertices=num_vertices,
            src=data["src"],
            dst=data["dst"],
            t=data["t"],
            indptr=data["indptr"],
            out_edges=data["out_edges"],
            labels=tuple(str(x) for x in data["labels"]),
            scale=scale,
        )
