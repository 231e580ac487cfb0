"""Tests for edge-list parsing, the temporal index and graph utilities."""

from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from temporal_comine.errors import GraphFormatError
from temporal_comine.generators import bipartite_graph
from temporal_comine.graph import (
    build_indexed_graph,
    detect_bipartite,
    edges_after,
    graph_summary,
    load_graph,
    load_index,
    neighbors_after,
    neighbors_after_edge,
    parse_edge_list,
    save_index,
)

triples_strategy = st.lists(
    st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 20)),
    max_size=40,
)


def two_coloring_conflict(num_vertices, pairs):
    """BFS 2-coloring of the undirected projection; returns a same-colored edge or None."""
    adjacency = [[] for _ in range(num_vertices)]
    for u, v in pairs:
        adjacency[u].append(v)
        adjacency[v].append(u)
    color = [-1] * num_vertices
    for start in range(num_vertices):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    queue.append(v)
    return next(((u, v) for u, v in pairs if color[u] == color[v]), None)


class TestParseEdgeList:
    """Tests for the text edge-list reader."""

    def test_numeric_tokens_interned_like_any_other(self):
        parsed = parse_edge_list("7 3 5\n2 7 3\n")
        assert parsed.triples == [(0, 1, 5), (2, 0, 3)]
        assert parsed.labels == ["7", "3", "2"]
        assert parsed.scale == 0

    def test_sparse_numeric_ids_stay_dense(self):
        parsed = parse_edge_list("0 2000000000 1\n2000000000 5 2")
        assert parsed.triples == [(0, 1, 1), (1, 2, 2)]
        g = build_indexed_graph(parsed.triples, parsed.labels, parsed.scale).warm()
        assert g.num_vertices == 3
        assert len(g.out_ids) == 3
        assert g.label(1) == "2000000000"
        assert detect_bipartite(g) is not None

    def test_labels_interned_in_first_appearance_order(self):
        parsed = parse_edge_list("alice bob 1\nbob carol 2\ncarol alice 3")
        assert parsed.labels == ["alice", "bob", "carol"]
        assert parsed.triples == [(0, 1, 1), (1, 2, 2), (2, 0, 3)]

    def test_commas_blank_lines_and_comments(self):
        parsed = parse_edge_list("# header\n\n0,1,10\n1, 2, 11\n")
        assert parsed.triples == [(0, 1, 10), (1, 2, 11)]

    def test_accepts_line_iterables(self):
        parsed = parse_edge_list(["0 1 1\n", "1 0 2\n"])
        assert len(parsed.triples) == 2

    def test_scale_header_turns_decimals_into_integers(self):
        parsed = parse_edge_list("#scale 2\nA B 1.25\nB C 1.5\n")
        assert [t for _, _, t in parsed.triples] == [125, 150]
        assert parsed.scale == 2

    def test_decimal_timestamp_without_scale_rejected(self):
        with pytest.raises(GraphFormatError) as exc_info:
            parse_edge_list("0 1 2\n0 1 1.5\n")
        assert exc_info.value.line == 2

    def test_wrong_field_count_names_line(self):
        with pytest.raises(GraphFormatError) as exc_info:
            parse_edge_list("0 1 1\n\n0 1\n")
        assert exc_info.value.line == 3
        assert "line 3" in str(exc_info.value)

    def test_non_numeric_timestamp_rejected(self):
        with pytest.raises(GraphFormatError):
            parse_edge_list("a b noon")

    def test_scale_after_edges_rejected(self):
        with pytest.raises(GraphFormatError):
            parse_edge_list("0 1 1\n#scale 3\n")

    def test_out_of_range_scale_rejected(self):
        with pytest.raises(GraphFormatError):
            parse_edge_list("#scale 40\n0 1 1\n")


class TestBuildIndexedGraph:
    """Tests for edge ordering and the out-edge index."""

    def test_edges_sorted_by_time_then_input_rank(self):
        g = build_indexed_graph([(0, 1, 5), (1, 2, 5), (2, 0, 1)])
        assert [(e.src, e.dst, e.t) for e in g.edges] == [(2, 0, 1), (0, 1, 5), (1, 2, 5)]
        assert [e.id for e in g.edges] == [0, 1, 2]

    def test_duplicate_timestamps_logged(self, caplog):
        build_indexed_graph([(0, 1, 5), (1, 2, 5)])
        assert "share a timestamp" in caplog.text

    def test_out_index_ascending_per_vertex(self):
        g = build_indexed_graph([(0, 1, 3), (1, 0, 1), (0, 2, 2), (0, 1, 0)])
        assert g.out_index(0).tolist() == [0, 2, 3]
        assert g.out_index(1).tolist() == [1]
        assert g.out_index(2).tolist() == []

    def test_empty_graph(self):
        g = build_indexed_graph([])
        assert g.num_edges == 0
        assert g.num_vertices == 0
        assert g.edges == ()

    def test_labels_extend_vertex_count(self):
        g = build_indexed_graph([(0, 1, 1)], labels=["a", "b", "isolated"])
        assert g.num_vertices == 3
        assert g.label(2) == "isolated"

    def test_negative_vertex_rejected(self):
        with pytest.raises(GraphFormatError):
            build_indexed_graph([(-1, 0, 1)])

    @given(triples_strategy, st.integers(0, 5), st.integers(-1, 40), st.integers(0, 25))
    @settings(max_examples=200, deadline=None)
    def test_out_range_matches_filter(self, triples, u, after_id, t_max):
        g = build_indexed_graph(triples, labels=[str(v) for v in range(6)])
        expected = [e for e in g.out_index(u).tolist() if e > after_id and g.t_list[e] <= t_max]
        assert neighbors_after_edge(g, u, after_id, t_max) == expected

    @given(triples_strategy, st.integers(-1, 40), st.integers(0, 25))
    @settings(max_examples=200, deadline=None)
    def test_global_range_matches_filter(self, triples, after_id, t_max):
        g = build_indexed_graph(triples)
        expected = [e for e in range(g.num_edges) if e > after_id and g.t_list[e] <= t_max]
        assert list(edges_after(g, after_id, t_max)) == expected


class TestNeighbors:
    """Tests for the timestamp-bounded neighbor queries."""

    def test_neighbors_after_half_open_interval(self):
        g = build_indexed_graph([(0, 1, 1), (0, 2, 2), (0, 3, 3), (0, 4, 4)])
        assert neighbors_after(g, 0, 1, 3) == [1, 2]

    def test_neighbors_after_rejects_inverted_bounds(self):
        g = build_indexed_graph([(0, 1, 1)])
        with pytest.raises(ValueError):
            neighbors_after(g, 0, 5, 1)


class TestGraphUtilities:
    """Tests for bipartiteness, summaries and the index cache."""

    def test_triangle_not_bipartite(self, triangle_graph):
        assert detect_bipartite(triangle_graph) is None

    def test_generated_bipartite_graph_detected(self):
        g = build_indexed_graph(bipartite_graph(10, 200, 1000, seed=3))
        partition = detect_bipartite(g)
        assert partition is not None
        assert all(not partition.same_side(s, d) for s, d in zip(g.src_list, g.dst_list))

    def test_path_sides_alternate(self):
        g = build_indexed_graph([(0, 1, 1), (1, 2, 2), (2, 3, 3)])
        partition = detect_bipartite(g)
        assert partition is not None
        sides = [partition.side(v) for v in range(4)]
        assert sides in ([0, 1, 0, 1], [1, 0, 1, 0])

    @given(triples_strategy)
    @settings(max_examples=200, deadline=None)
    def test_rejection_has_odd_cycle_witness(self, triples):
        g = build_indexed_graph(triples)
        pairs = list(zip(g.src_list, g.dst_list))
        conflict = two_coloring_conflict(g.num_vertices, pairs)
        partition = detect_bipartite(g)
        if partition is None:
            assert conflict is not None
        else:
            assert conflict is None
            assert all(partition.side(u) != partition.side(v) for u, v in pairs)

    def test_summary_counts(self):
        g = build_indexed_graph([(0, 1, 1), (0, 1, 1), (1, 2, 9)])
        summary = graph_summary(g)
        assert summary.temporal_edges == 3
        assert summary.static_edges == 2
        assert summary.time_span == 8
        assert summary.duplicate_timestamps == 1
        assert summary.to_dict()["vertices"] == 3

    def test_index_cache_preserves_graph(self, tmp_path, walkthrough_graph):
        path = tmp_path / "graph.npz"
        save_index(walkthrough_graph, path)
        loaded = load_graph(path)
        assert np.array_equal(loaded.t, walkthrough_graph.t)
        assert np.array_equal(loaded.out_edges, walkthrough_graph.out_edges)
        assert loaded.labels == walkthrough_graph.labels

    def test_index_cache_bad_magic(self, tmp_path):
        path = tmp_path / "other.npz"
        np.savez(path, magic=np.frombuffer(b"NOTIDX", dtype=np.uint8))
        with pytest.raises(GraphFormatError):
            load_index(path)

    def test_index_cache_version_mismatch(self, tmp_path):
        path = tmp_path / "old.npz"
        np.savez(path, magic=np.frombuffer(b"TCMIDX", dtype=np.uint8), version=np.array([99]))
        with pytest.raises(GraphFormatError, match="version 99"):
            load_index(path)

    def test_load_graph_from_text(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("A B 1\nB C 2\n", encoding="utf-8")
        g = load_graph(path)
        assert g.num_edges == 2
        assert g.labels == ("A", "B", "C")
