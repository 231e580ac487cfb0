"""Query motifs and the multi-motif query document.

A motif is an ordered sequence of directed edges between motif vertices;
the position of an edge is its temporal rank. Motifs are compared and
grouped in canonical form, where vertices are numbered by first appearance.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, Decimal
from enum import Enum
from pathlib import Path

from .errors import QueryError
from .validation import QueryValidator, default_threads

logger = logging.getLogger(__name__)

Edge = tuple[int, int]
TMap = Mapping[int, Edge]


class Mode(Enum):
    """What a mining run produces."""

    COUNT = "count"
    ENUMERATE = "enumerate"


class Balance(Enum):
    """Load-balancing policy of the parallel runtime."""

    NONE = "none"
    DYNAMIC = "dynamic"
    CONTEXT_SPLIT = "context_split"


@dataclass(frozen=True)
class Motif:
    """Named temporal motif; ``edges[i]`` is the edge with temporal rank i+1."""

    name: str
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        if not edges:
            raise QueryError(f"motif {self.name!r} has no edges")
        for rank, (u, v) in enumerate(edges, start=1):
            if u == v:
                raise QueryError(f"motif {self.name!r} edge {rank} is a self-loop")
        object.__setattr__(self, "edges", edges)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def num_vertices(self) -> int:
        return len({v for edge in self.edges for v in edge})

    def vertices(self) -> list[int]:
        """Vertices in order of first appearance."""
        seen: dict[int, None] = {}
        for u, v in self.edges:
            seen.setdefault(u)
            seen.setdefault(v)
        return list(seen)

    @property
    def is_canonical(self) -> bool:
        return self.vertices() == list(range(self.num_vertices))

    def prefix(self, k: int) -> tuple[Edge, ...]:
        """The first ``k`` edges."""
        return self.edges[:k]

    def renamed(self, name: str) -> Motif:
        return Motif(name, self.edges)

    def describe(self) -> str:
        return ", ".join(f"{u}->{v}" for u, v in self.edges)


def canonicalize(m: Motif) -> Motif:
    """Relabel vertices by first appearance, keeping edge order. Idempotent."""
    relabel: dict[int, int] = {}
    edges = []
    for u, v in m.edges:
        cu = relabel.setdefault(u, len(relabel))
        cv = relabel.setdefault(v, len(relabel))
        edges.append((cu, cv))
    return Motif(m.name, tuple(edges))


def graph_to_tmap(m: Motif) -> TMap:
    """Map each temporal rank (1-based) to its static edge."""
    return {rank: edge for rank, edge in enumerate(m.edges, start=1)}


def _catalog_entries() -> dict[str, tuple[Edge, ...]]:
    return {
        "edge": ((0, 1),),
        "ping-pong": ((0, 1), (1, 0)),
        "wedge": ((0, 1), (1, 2)),
        "repeat": ((0, 1), (0, 1)),
        "3-cycle": ((0, 1), (1, 2), (2, 0)),
        "3-path": ((0, 1), (1, 2), (2, 3)),
        "feed-forward": ((0, 1), (1, 2), (0, 2)),
        "3-star-out": ((0, 1), (0, 2), (0, 3)),
        "3-star-in": ((0, 1), (2, 1), (3, 1)),
        "4-cycle": ((0, 1), (1, 2), (2, 3), (3, 0)),
        "4-cycle-chord": ((0, 1), (1, 2), (2, 3), (3, 0), (0, 2)),
        "bi-fan": ((0, 1), (0, 2), (3, 1), (3, 2)),
    }


def motif_catalog() -> dict[str, Motif]:
    """Named reference motifs from the temporal-motif literature, canonical form."""
    return {name: Motif(name, edges) for name, edges in _catalog_entries().items()}


def delta_units(delta: Decimal, scale: int = 0) -> int:
    """Window length in integer time units of a graph with the given ``#scale``, rounded down."""
    units = int(delta.scaleb(scale).to_integral_value(rounding=ROUND_FLOOR))
    if units <= 0:
        raise QueryError(f"delta {delta} is below one time unit at scale {scale}")
    return units


@dataclass(frozen=True)
class Query:
    """A parsed multi-motif query.

    Attributes:
        graph_path: Edge-list (or index cache) to mine, if the document names one
        motifs: Canonical, pairwise distinct motifs in document order
        delta: Time-window length in the graph's unscaled time units
        mode: count or enumerate
        threads: Worker count
        balance: Load-balancing policy
    """

    motifs: tuple[Motif, ...]
    delta: Decimal
    graph_path: str | None = None
    mode: Mode = Mode.COUNT
    threads: int = field(default_factory=default_threads)
    balance: Balance = Balance.DYNAMIC

    def delta_units(self, scale: int = 0) -> int:
        """Delta expressed in the graph's integer time units (after ``#scale``).

        Raises:
            QueryError: If the window rounds down to zero units
        """
        return delta_units(self.delta, scale)

    def motif(self, name: str) -> Motif:
        for m in self.motifs:
            if m.name == name:
                return m
        raise KeyError(name)


def _intern_motif(name: str, raw_edges: list[tuple[str, str]]) -> Motif:
    ids: dict[str, int] = {}
    edges = [(ids.setdefault(u, len(ids)), ids.setdefault(v, len(ids))) for u, v in raw_edges]
    return canonicalize(Motif(name, tuple(edges)))


def parse_query(stream: str | Iterable[str], validator: QueryValidator | None = None) -> Query:
    """Parse a query document.

    Format::

        graph <path>
        delta <positive number>
        mode count|enumerate
        threads <n>
        balance none|dynamic|context_split
        motif <name>
          edge <u> <v>
        end
        use <catalog-motif> [as <name>]

    Motifs are canonicalized; defaults are mode=count, balance=dynamic and
    threads=hardware thread count.

    Raises:
        QueryError: On a malformed line, duplicate motif, self-loop edge or delta <= 0
    """
    validator = validator or QueryValidator()
    if isinstance(stream, str):
        stream = stream.splitlines()

    settings: dict[str, object] = {}
    motifs: list[Motif] = []
    current: tuple[str, int, list[tuple[str, str]]] | None = None
    catalog = motif_catalog()

    def add(motif: Motif, line: int) -> None:
        for other in motifs:
            if other.name == motif.name:
                raise QueryError(f"motif name {motif.name!r} declared twice", line)
            if other.edges == motif.edges:
                raise QueryError(f"duplicate motif: {other.name!r} and {motif.name!r} are identical", line)
        motifs.append(motif)

    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0].lower()

        if current is not None:
            name, start, edges = current
            if keyword == "edge":
                if len(tokens) != 3:
                    raise QueryError("expected 'edge <u> <v>'", lineno)
                edges.append((tokens[1], tokens[2]))
            elif keyword == "end":
                validator.validate_motif_edges(name, edges, start)
                add(_intern_motif(name, edges), start)
                current = None
            else:
                raise QueryError(f"unexpected {keyword!r} inside motif {name!r} (missing 'end'?)", lineno)
            continue

        if keyword == "motif":
            if len(tokens) != 2:
                raise QueryError("expected 'motif <name>'", lineno)
            current = (validator.validate_motif_name(tokens[1], lineno), lineno, [])
        elif keyword == "use":
            if len(tokens) not in (2, 4) or (len(tokens) == 4 and tokens[2].lower() != "as"):
                raise QueryError("expected 'use <catalog-motif> [as <name>]'", lineno)
            if tokens[1] not in catalog:
                raise QueryError(f"unknown catalog motif {tokens[1]!r}", lineno)
            alias = validator.validate_motif_name(tokens[3] if len(tokens) == 4 else tokens[1], lineno)
            add(catalog[tokens[1]].renamed(alias), lineno)
        elif keyword in ("graph", "delta", "mode", "threads", "balance"):
            if len(tokens) < 2:
                raise QueryError(f"'{keyword}' needs a value", lineno)
            if keyword in settings:
                raise QueryError(f"'{keyword}' given twice", lineno)
            value = line.split(None, 1)[1]
            if keyword == "graph":
                settings[keyword] = validator.validate_path(value, lineno)
            elif keyword == "delta":
                settings[keyword] = validator.validate_delta(value, lineno)
            elif keyword == "mode":
                settings[keyword] = Mode(validator.validate_mode(value, lineno))
            elif keyword == "threads":
                settings[keyword] = validator.validate_threads(value, lineno)
            else:
                settings[keyword] = Balance(validator.validate_balance(value, lineno))
        else:
            raise QueryError(f"unknown directive {keyword!r}", lineno)

    if current is not None:
        raise QueryError(f"motif {current[0]!r} is missing 'end'", current[1])
    if "delta" not in settings:
        raise QueryError("query must set 'delta'")
    validator.validate_motif_count(len(motifs))

    query = Query(
        motifs=tuple(motifs),
        delta=settings["delta"],  # type: ignore[arg-type]
        graph_path=settings.get("graph"),  # type: ignore[arg-type]
        mode=settings.get("mode", Mode.COUNT),  # type: ignore[arg-type]
        threads=settings.get("threads", default_threads()),  # type: ignore[arg-type]
        balance=settings.get("balance", Balance.DYNAMIC),  # type: ignore[arg-type]
    )
    logger.debug("Parsed query with %d motifs, delta=%s", len(query.motifs), query.delta)
    return query


def load_query(path: str | Path) -> Query:
    """Read and parse a query file."""
    with open(path, encoding="utf-8") as f:
        return parse_query(f)
