"""Shared fixtures: small hand-built graphs, the walkthrough motif group and seeded instances."""

from __future__ import annotations

import random
from dataclasses import dataclass

import pytest

from temporal_comine.config import RuntimeConfig
from temporal_comine.generators import GroupShape, generate, random_motif_group
from temporal_comine.graph import TemporalGraph, build_indexed_graph, parse_edge_list
from temporal_comine.motif import Motif


def make_graph(text: str) -> TemporalGraph:
    """Graph from edge-list text, e.g. ``"A B 1\\nB C 2"``."""
    parsed = parse_edge_list(text)
    return build_indexed_graph(parsed.triples, parsed.labels, parsed.scale)


M3 = Motif("M3", ((0, 1), (1, 2), (2, 0)))
M4 = Motif("M4", ((0, 1), (1, 2), (2, 3), (3, 0)))
M5 = Motif("M5", ((0, 1), (1, 2), (2, 3), (3, 1)))


@pytest.fixture
def triangle_graph() -> TemporalGraph:
    return make_graph("A B 1\nB C 2\nC A 3")


@pytest.fixture
def walkthrough_graph() -> TemporalGraph:
    return make_graph("A B 1\nB C 2\nC A 3\nC D 4\nD A 5")


@pytest.fixture
def walkthrough_group() -> list[Motif]:
    return [M3, M4, M5]


@pytest.fixture
def splitting_config() -> RuntimeConfig:
    """Tiny intervals so that context splitting happens on small inputs."""
    return RuntimeConfig(inter_interval=4, intra_interval=1, idle_fraction=0.01, chunks_per_worker=2)


@dataclass
class Instance:
    seed: int
    graph: TemporalGraph
    motifs: list[Motif]
    delta: int
    shape: GroupShape


SHAPES = list(GroupShape)
GENERATOR_NAMES = ["uniform", "hub", "bipartite", "burst"]


def comining_instance(seed: int, ties: bool = False) -> Instance:
    """Seeded motif group of 2-6 motifs over a small synthetic graph; shapes cycle with the seed.

    With ``ties`` about eight edges share each timestamp.
    """
    rng = random.Random(seed)
    shape = SHAPES[seed % len(SHAPES)]
    motifs = random_motif_group(rng, rng.randint(2, 6), shape)
    num_vertices = rng.randint(3, 20)
    num_edges = rng.randint(20, 150)
    span = max(1, num_edges // 8) if ties else 3 * num_edges
    triples = generate(rng.choice(GENERATOR_NAMES), num_vertices, num_edges, span, seed=seed)
    delta = rng.randint(1, max(1, 8 * span // num_edges))
    return Instance(seed, build_indexed_graph(triples), motifs, delta, shape)


@pytest.fixture
def instance_factory():
    return comining_instance
