"""Synthetic temporal graphs and random motif groups.

Generators are registered by name and return ``(src, dst, t)`` triples
without self-loops; feed them to ``build_indexed_graph``.
"""

from __future__ import annotations

import random
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import Triple
from .motif import Edge, Motif, canonicalize

GeneratorFn = Callable[..., list[Triple]]


def _times(rng: np.random.Generator, num_edges: int, time_span: int) -> np.ndarray:
    # distinct timestamps whenever the span allows it
    if time_span + 1 >= num_edges:
        return rng.choice(time_span + 1, size=num_edges, replace=False)
    return rng.integers(0, time_span + 1, size=num_edges)


def _pairs(rng: np.random.Generator, num_vertices: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    src = rng.integers(0, num_vertices, size=size)
    dst = (src + rng.integers(1, num_vertices, size=size)) % num_vertices
    return src, dst


def _triples(src: np.ndarray, dst: np.ndarray, t: np.ndarray) -> list[Triple]:
    return [(int(s), int(d), int(x)) for s, d, x in zip(src, dst, t)]


def uniform_graph(num_vertices: int, num_edges: int, time_span: int, seed: int = 0) -> list[Triple]:
    """Endpoints and timestamps drawn uniformly."""
    if num_vertices < 2:
        raise ValueError("need at least 2 vertices")
    rng = np.random.default_rng(seed)
    src, dst = _pairs(rng, num_vertices, num_edges)
    return _triples(src, dst, _times(rng, num_edges, time_span))


def hub_graph(
    num_vertices: int,
    num_edges: int,
    time_span: int,
    seed: int = 0,
    hub_share: float = 0.9,
) -> list[Triple]:
    """Vertex 0 is an endpoint of ``hub_share`` of the edges, half outgoing and half incoming."""
    if num_vertices < 2:
        raise ValueError("need at least 2 vertices")
    if not 0.0 <= hub_share <= 1.0:
        raise ValueError("hub_share must be in [0, 1]")
    rng = np.random.default_rng(seed)
    src, dst = _pairs(rng, num_vertices, num_edges)
    at_hub = rng.random(num_edges) < hub_share
    others = rng.integers(1, num_vertices, size=num_edges)
    outgoing = rng.random(num_edges) < 0.5
    src = np.where(at_hub & outgoing, 0, np.where(at_hub, others, src))
    dst = np.where(at_hub & outgoing, others, np.where(at_hub, 0, dst))
    return _triples(src, dst, _times(rng, num_edges, time_span))


def bipartite_graph(num_vertices: int, num_edges: int, time_span: int, seed: int = 0) -> list[Triple]:
    """Edges only between vertices ``< n // 2`` and vertices ``>= n // 2``, either direction."""
    if num_vertices < 2:
        raise ValueError("need at least 2 vertices")
    rng = np.random.default_rng(seed)
    left = num_vertices // 2
    a = rng.integers(0, left, size=num_edges)
    b = rng.integers(left, num_vertices, size=num_edges)
    forward = rng.random(num_edges) < 0.5
    return _triples(np.where(forward, a, b), np.where(forward, b, a), _times(rng, num_edges, time_span))


def burst_graph(
    num_vertices: int,
    num_edges: int,
    time_span: int,
    seed: int = 0,
    burst_size: int = 50,
) -> list[Triple]:
    """Timestamps clustered around ``num_edges / burst_size`` random instants."""
    if num_vertices < 2:
        raise ValueError("need at least 2 vertices")
    rng = np.random.default_rng(seed)
    src, dst = _pairs(rng, num_vertices, num_edges)
    bursts = max(1, num_edges // max(1, burst_size))
    centres = rng.integers(0, time_span + 1, size=bursts)
    spread = max(1, time_span // (bursts * 20))
    t = centres[rng.integers(0, bursts, size=num_edges)] + rng.integers(0, spread + 1, size=num_edges)
    return _triples(src, dst, np.clip(t, 0, time_span))


@dataclass(frozen=True)
class GeneratorSpec:
    """A named synthetic graph generator."""

    name: str
    description: str
    fn: GeneratorFn


GENERATORS: dict[str, GeneratorSpec] = {
    "uniform": GeneratorSpec("uniform", "uniform random endpoints and times", uniform_graph),
    "hub": GeneratorSpec("hub", "one hub vertex incident to most edges", hub_graph),
    "bipartite": GeneratorSpec("bipartite", "edges only across two vertex halves", bipartite_graph),
    "burst": GeneratorSpec("burst", "timestamps clustered in bursts", burst_graph),
}


def get_generator(name: str) -> GeneratorSpec:
    """Look up a generator by name.

    Raises:
        KeyError: If no generator has that name
    """
    try:
        return GENERATORS[name]
    except KeyError:
        raise KeyError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}") from None


def generate(name: str, num_vertices: int, num_edges: int, time_span: int, seed: int = 0, **params: object) -> list[Triple]:
    return get_generator(name).fn(num_vertices, num_edges, time_span, seed, **params)


class GroupShape(Enum):
    """How the motifs of a random group overlap."""

    DEPTH = "depth"
    FANOUT = "fanout"
    HETEROGENEOUS = "heterogeneous"


def _extend(edges: tuple[Edge, ...], rng: random.Random, max_vertices: int) -> tuple[Edge, ...]:
    """Append one edge touching at least one existing vertex."""
    vertices = sorted({v for e in edges for v in e})
    pool = vertices + ([len(vertices)] if len(vertices) < max_vertices else [])
    while True:
        u = rng.choice(pool)
        v = rng.choice(pool)
        if u != v and (u in vertices or v in vertices):
            return (*edges, (u, v))


def random_motif(rng: random.Random, max_edges: int = 4, max_vertices: int = 4, name: str = "m") -> Motif:
    """Connected canonical motif with 1..max_edges edges and at most max_vertices vertices."""
    if max_vertices < 2 or max_edges < 1:
        raise ValueError("a motif needs at least 2 vertices and 1 edge")
    edges: tuple[Edge, ...] = ((0, 1),)
    for _ in range(rng.randint(1, max_edges) - 1):
        edges = _extend(edges, rng, max_vertices)
    return canonicalize(Motif(name, edges))


def random_motif_group(
    rng: random.Random,
    size: int,
    shape: GroupShape | str = GroupShape.HETEROGENEOUS,
    max_vertices: int = 4,
    max_attempts: int = 1000,
) -> list[Motif]:
    """Pairwise distinct canonical motifs named m1..m<size>.

    depth: every motif extends the previous one by one edge.
    fanout: a shared 1-2 edge prefix plus one distinct extension edge each.
    heterogeneous: random motifs mixed with extensions of earlier ones.
    """
    shape = GroupShape(shape)
    if size < 1:
        raise ValueError("group size must be positive")
    found: dict[tuple[Edge, ...], None] = {}
    attempts = 0

    def add(edges: tuple[Edge, ...]) -> None:
        m = canonicalize(Motif("m", edges))
        found.setdefault(m.edges)

    if shape is GroupShape.DEPTH:
        edges = random_motif(rng, max_edges=2, max_vertices=max_vertices).edges
        add(edges)
        while len(found) < size:
            edges = _extend(edges, rng, max_vertices)
            add(edges)
    elif shape is GroupShape.FANOUT:
        prefix = random_motif(rng, max_edges=2, max_vertices=max_vertices).edges
        while len(found) < size:
            attempts += 1
            if attempts > max_attempts:
                # not enough distinct extensions: grow the shared prefix
                prefix = _extend(prefix, rng, max_vertices + 1)
                attempts = 0
            add(_extend(prefix, rng, max_vertices + 1))
    else:
        while len(found) < size:
            attempts += 1
            if attempts > max_attempts:
                raise ValueError(f"could not draw {size} distinct motifs")
            if found and rng.random() < 0.5:
                base = rng.choice(list(found))
                add(_extend(base, rng, max_vertices))
            else:
                add(random_motif(rng, max_vertices=max_vertices).edges)

    return [Motif(f"m{i}", edges) for i, edges in enumerate(list(found)[:size], start=1)]
