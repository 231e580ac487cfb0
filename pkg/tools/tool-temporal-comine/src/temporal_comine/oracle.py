"""Brute-force reference for differential testing.

Enumerates every increasing tuple of graph edges inside the window and
checks it against the motif with a fresh vertex assignment. Shares no
search code with the miner; slow on purpose.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from itertools import combinations

from .errors import OracleGuardError
from .graph import TemporalGraph
from .motif import Motif

logger = logging.getLogger(__name__)

DEFAULT_MAX_EDGES = 500
SMALL_MOTIF_EDGES = 3


def check_guard(g: TemporalGraph, m: Motif, max_edges: int = DEFAULT_MAX_EDGES, allow_large: bool = False) -> None:
    """Refuse inputs where tuple enumeration may run for hours.

    Raises:
        OracleGuardError: If the graph has more than ``max_edges`` edges and the
            motif more than three, unless ``allow_large`` is set
    """
    if g.num_edges <= max_edges or len(m) <= SMALL_MOTIF_EDGES:
        return
    if allow_large:
        logger.warning("Oracle guard bypassed: %d graph edges, %d motif edges", g.num_edges, len(m))
        return
    raise OracleGuardError(
        f"oracle refuses motif {m.name!r} with {len(m)} edges on a graph of {g.num_edges} edges "
        f"(limit {max_edges} edges unless the motif has at most {SMALL_MOTIF_EDGES})"
    )


def _assignable(m: Motif, ids: tuple[int, ...], src: list[int], dst: list[int]) -> bool:
    m2g: dict[int, int] = {}
    g2m: dict[int, int] = {}
    for (u_m, v_m), e in zip(m.edges, ids):
        for a, b in ((u_m, src[e]), (v_m, dst[e])):
            if m2g.setdefault(a, b) != b or g2m.setdefault(b, a) != a:
                return False
    return True


def brute_force_enumerate(
    g: TemporalGraph,
    m: Motif,
    delta: float,
    max_edges: int = DEFAULT_MAX_EDGES,
    allow_large: bool = False,
) -> list[tuple[int, ...]]:
    """All matches of ``m`` as edge-id tuples, sorted lexicographically.

    ``delta`` may be ``math.inf``.
    """
    check_guard(g, m, max_edges, allow_large)
    src = g.src.tolist()
    dst = g.dst.tolist()
    t = g.t.tolist()
    k = len(m)
    found: list[tuple[int, ...]] = []
    for first in range(g.num_edges):
        end = bisect_right(t, t[first] + delta)
        for rest in combinations(range(first + 1, end), k - 1):
            ids = (first, *rest)
            if t[ids[-1]] - t[first] <= delta and _assignable(m, ids, src, dst):
                found.append(ids)
    return found


def brute_force_count(
    g: TemporalGraph,
    m: Motif,
    delta: float,
    max_edges: int = DEFAULT_MAX_EDGES,
    allow_large: bool = False,
) -> int:
    return len(brute_force_enumerate(g, m, delta, max_edges, allow_large))
