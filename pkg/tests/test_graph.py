import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnn_risk.graph import (
    Graph,
    GraphFormatError,
    cycle_block_graph,
    heterophilic_perturbation,
    homophily_ratio,
    load_edge_list,
    load_labels,
    neighbourhood_label_distribution,
    save_edge_list,
    save_labels,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestGraphType:
    def test_from_edges_canonicalizes(self):
        g = Graph.from_edges(3, [(2, 1), (0, 1), (1, 2), (1, 0)])
        assert g.edges == ((0, 1), (1, 2))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph.from_edges(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Graph.from_edges(2, [(0, 2)])

    def test_rejects_unsorted_direct_construction(self):
        with pytest.raises(ValueError):
            Graph(3, ((1, 2), (0, 1)))

    def test_label_count_checked(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(0, 1)], labels=[0, 1])

    def test_degree_profile(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3)])
        prof = g.degree_profile()
        np.testing.assert_array_equal(prof.degrees, [1, 3, 1, 1])
        assert prof.mean_degree == pytest.approx(2 * 3 / 4)
        assert prof.degrees.sum() == 2 * g.num_edges

    def test_adjacency_symmetric(self):
        g = Graph.from_edges(4, [(0, 1), (2, 3), (1, 3)])
        A = g.adjacency()
        np.testing.assert_array_equal(A, A.T)
        assert A.sum() == 2 * g.num_edges

    def test_one_hot(self):
        g = Graph.from_edges(3, [(0, 1)], labels=[2, 0, 2])
        np.testing.assert_array_equal(g.one_hot_labels(), [[0, 1], [1, 0], [0, 1]])

    def test_components(self):
        g = Graph.from_edges(5, [(0, 1), (2, 3)])
        assert g.connected_components() == 3


class TestEdgeListIO:
    def test_simple_path(self, tmp_path):
        g = load_edge_list(write(tmp_path, "e.txt", "0 1\n1 2"))
        assert g.n == 3
        assert g.edges == ((0, 1), (1, 2))

    def test_reversed_duplicate(self, tmp_path):
        g = load_edge_list(write(tmp_path, "e.txt", "1 0\n0 1"))
        assert g.n == 2
        assert g.edges == ((0, 1),)

    def test_self_loop_names_line(self, tmp_path):
        with pytest.raises(GraphFormatError, match="self-loop at line 1"):
            load_edge_list(write(tmp_path, "e.txt", "0 0"))

    def test_comments_and_blanks(self, tmp_path):
        g = load_edge_list(write(tmp_path, "e.txt", "# header\n\n0 1\n  # indented\n2 1\n"))
        assert g.edges == ((0, 1), (1, 2))

    def test_self_loop_line_number_counts_comments(self, tmp_path):
        with pytest.raises(GraphFormatError, match="line 3"):
            load_edge_list(write(tmp_path, "e.txt", "# c\n0 1\n2 2\n"))

    @pytest.mark.parametrize("text", ["0 1 2", "0", "a b", "0 -1", "1.5 2"])
    def test_malformed(self, tmp_path, text):
        with pytest.raises(GraphFormatError):
            load_edge_list(write(tmp_path, "e.txt", text))

    def test_n_hint(self, tmp_path):
        g = load_edge_list(write(tmp_path, "e.txt", "0 1"), n_hint=5)
        assert g.n == 5
        g = load_edge_list(write(tmp_path, "e.txt", "0 7"), n_hint=5)
        assert g.n == 8

    def test_round_trip_isolated_tail(self, tmp_path):
        g = Graph.from_edges(6, [(0, 3), (1, 2)])
        p = tmp_path / "g.txt"
        save_edge_list(g, p)
        assert load_edge_list(p, n_hint=g.n) == g

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(2, 12),
        pairs=st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=30),
    )
    def test_round_trip_property(self, tmp_path_factory, n, pairs):
        edges = [(u % n, v % n) for u, v in pairs if u % n != v % n]
        g = Graph.from_edges(n, edges)
        p = tmp_path_factory.mktemp("rt") / "g.txt"
        save_edge_list(g, p)
        assert load_edge_list(p, n_hint=n) == g


class TestLabelIO:
    def test_attach(self, tmp_path):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        out = load_labels(write(tmp_path, "y.txt", "0 0\n1 1\n2 1"), g)
        assert out.labels == (0, 1, 1)

    def test_missing_node(self, tmp_path):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        with pytest.raises(GraphFormatError, match="node 2 unlabeled"):
            load_labels(write(tmp_path, "y.txt", "0 0\n1 1"), g)

    def test_unknown_node(self, tmp_path):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        with pytest.raises(GraphFormatError, match="unknown node 7"):
            load_labels(write(tmp_path, "y.txt", "0 0\n1 1\n2 0\n7 1"), g)

    def test_conflicting_relabel(self, tmp_path):
        g = Graph.from_edges(2, [(0, 1)])
        with pytest.raises(GraphFormatError, match="relabeled"):
            load_labels(write(tmp_path, "y.txt", "0 0\n1 1\n0 1"), g)

    def test_round_trip(self, tmp_path):
        g = cycle_block_graph(2, 4)
        p = tmp_path / "y.txt"
        save_labels(g, p)
        assert load_labels(p, Graph(g.n, g.edges)) == g


class TestCycleBlocks:
    def test_triangle(self):
        g = cycle_block_graph(1, 3)
        assert g.edges == ((0, 1), (0, 2), (1, 2))
        assert g.labels == (0, 0, 0)

    def test_two_squares(self):
        g = cycle_block_graph(2, 4)
        assert g.n == 8
        assert g.labels == (0, 0, 0, 0, 1, 1, 1, 1)
        assert all(u // 4 == v // 4 for u, v in g.edges)

    @given(k=st.integers(1, 6), s=st.integers(3, 10))
    def test_two_regular_with_k_components(self, k, s):
        g = cycle_block_graph(k, s)
        assert np.all(g.degrees() == 2)
        assert g.connected_components() == k
        assert g.num_edges == k * s

    @pytest.mark.parametrize("args", [(0, 4), (2, 2)])
    def test_bad_arguments(self, args):
        with pytest.raises(ValueError):
            cycle_block_graph(*args)


class TestHomophily:
    def test_pure_triangle(self):
        assert homophily_ratio(cycle_block_graph(1, 3)) == 1.0

    def test_cross_edge(self):
        assert homophily_ratio(Graph.from_edges(2, [(0, 1)], labels=[0, 1])) == 0.0

    def test_blocks_are_pure(self):
        assert homophily_ratio(cycle_block_graph(2, 5)) == 1.0

    def test_edgeless(self):
        with pytest.raises(ValueError):
            homophily_ratio(Graph(2, (), (0, 1)))

    def test_neighbourhood_distribution_rows(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], labels=[0, 0, 1, 1])
        dist = neighbourhood_label_distribution(g)
        # node 0: [1, 0]; node 1: [0.5, 0.5] -> class 0 average [0.75, 0.25]
        np.testing.assert_allclose(dist[0], [0.75, 0.25])
        np.testing.assert_allclose(dist.sum(axis=1), 1.0)


class TestPerturbation:
    def test_zero_edges_identity(self):
        g = cycle_block_graph(3, 5)
        assert heterophilic_perturbation(g, 0, rng_seed=1) is g

    def test_edges_are_heterophilic_and_new(self):
        g = cycle_block_graph(3, 6)
        out = heterophilic_perturbation(g, 10, rng_seed=7)
        new = set(out.edges) - set(g.edges)
        assert len(new) == 10
        assert set(g.edges) <= set(out.edges)
        y = out.label_array()
        assert all(y[u] != y[v] for u, v in new)

    def test_homophily_drops(self):
        g = cycle_block_graph(4, 8)
        out = heterophilic_perturbation(g, 5, rng_seed=3)
        assert homophily_ratio(out) < homophily_ratio(g)

    def test_deterministic(self):
        g = cycle_block_graph(3, 8)
        assert heterophilic_perturbation(g, 12, 11) == heterophilic_perturbation(g, 12, 11)

    def test_insufficient_pairs(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)], labels=[0, 1, 1])
        # heterophilic absent pairs: (0, 2) only
        with pytest.raises(ValueError, match="cannot add 2"):
            heterophilic_perturbation(g, 2, rng_seed=0)

    def test_unlabeled(self):
        with pytest.raises(ValueError):
            heterophilic_perturbation(Graph.from_edges(2, [(0, 1)]), 1, 0)

    def test_saturates_all_pairs(self):
        g = cycle_block_graph(2, 3)
        out = heterophilic_perturbation(g, 9, rng_seed=5)
        assert out.num_edges == g.num_edges + 9
        assert homophily_ratio(out) == pytest.approx(6 / 15)

    @settings(max_examples=30, deadline=None)
    @given(k=st.integers(2, 4), s=st.integers(3, 7), m=st.integers(1, 12), seed=st.integers(0, 2**31))
    def test_edge_count_and_simplicity(self, k, s, m, seed):
        g = cycle_block_graph(k, s)
        out = heterophilic_perturbation(g, m, seed)
        assert out.num_edges == g.num_edges + m
        assert all(u < v for u, v in out.edges)
