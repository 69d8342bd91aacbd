import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_graph
from randsurf.graph import (
    LinkGraph,
    induced_visited_subgraph,
    load_edge_list,
    out_degree,
    read_node_table,
    sublinear_scale,
    visit_vector,
    write_edge_list,
    write_node_table,
)


def write(tmp_path, text, name="edges.tsv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoad:
    def test_cycle(self, tmp_path):
        g = load_edge_list(write(tmp_path, "A\tB\nB\tA\n"))
        assert g.n == 2
        assert list(g.edges()) == [(0, 1, 1.0), (1, 0, 1.0)]

    def test_duplicates_collapse(self, tmp_path):
        g = load_edge_list(write(tmp_path, "A\tB\nA\tB\n"))
        assert g.num_edges == 1 and g.out_edges(0) == [(1, 1.0)]

    def test_weight_column(self, tmp_path):
        g = load_edge_list(write(tmp_path, "A\tB\t2.5\n"))
        assert g.out_edges(0) == [(1, 2.5)]

    @pytest.mark.parametrize("text", ["A\n", "A\tB\tC\tD\n", "A\tB\tx\n", "A\tB\t0\n", "\tB\n"])
    def test_malformed(self, tmp_path, text):
        with pytest.raises(ValueError, match=":2:"):
            load_edge_list(write(tmp_path, "X\tY\n" + text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_edge_list(tmp_path / "nope.tsv")

    def test_round_trip_with_node_table(self, tmp_path):
        g = LinkGraph.from_edges([("A", "B", 2.0), ("B", "C", 1.0)], nodes=["Z"])
        write_edge_list(tmp_path / "e.tsv", g, weighted=True)
        write_node_table(tmp_path / "n.tsv", g)
        assert read_node_table(tmp_path / "n.tsv") == ["Z", "A", "B", "C"]
        h = load_edge_list(tmp_path / "e.tsv", tmp_path / "n.tsv")
        assert h.urls == g.urls
        assert list(h.edges()) == list(g.edges())


class TestDegree:
    def test_weighted(self):
        g = LinkGraph.from_edges([("A", "B", 1.0), ("A", "C", 2.5)])
        assert out_degree(g, 0) == 3.5

    def test_dangling(self):
        g = LinkGraph.from_edges([("A", "B")])
        assert out_degree(g, 1) == 0

    def test_star_hub(self):
        g = LinkGraph.from_edges([("H", "a"), ("H", "b"), ("H", "c")])
        assert out_degree(g, g.id_of("H")) == 3
        assert np.array_equal(g.out_degrees(), [3, 0, 0, 0])

    def test_out_of_range(self):
        g = LinkGraph.from_edges([("A", "B")])
        with pytest.raises(IndexError):
            out_degree(g, 2)


def test_interning_round_trip():
    g = random_graph(np.random.default_rng(0), 30, 0.1)
    assert all(g.id_of(g.url_of(i)) == i for i in range(g.n))
    assert all(g.url_of(g.id_of(u)) == u for u in g.urls)


def test_first_seen_order():
    g = LinkGraph.from_edges([("C", "A"), ("B", "C")])
    assert g.urls == ["C", "A", "B"]


def test_adjacency_convention():
    g = LinkGraph.from_edges([("A", "B", 3.0)])
    a = g.adjacency_dense()
    # A[i, j] > 0 iff j links to i
    assert a[1, 0] == 3.0 and a[0, 1] == 0.0


def test_immutable():
    g = LinkGraph.from_edges([("A", "B")])
    with pytest.raises(ValueError):
        g.weights[0] = 2.0


class TestSublinear:
    def test_values(self):
        assert sublinear_scale(0) == 0
        assert sublinear_scale(1) == 1
        # 1 + ln 20 computed independently via log10
        assert sublinear_scale(20) == pytest.approx(1 + math.log10(20) / math.log10(math.e), abs=1e-14)
        assert sublinear_scale(20) == pytest.approx(3.9957, abs=5e-5)

    def test_negative(self):
        with pytest.raises(ValueError):
            sublinear_scale(-1)


class TestInducedSubgraph:
    def g(self):
        return LinkGraph.from_edges([("A", "B"), ("A", "C"), ("B", "D"), ("D", "A"), ("C", "A")])

    def test_examples(self):
        g = self.g()
        v = visit_vector(g, ["A", "B", "C"])
        sub = induced_visited_subgraph(g, {("A", "B"): 1}, v)
        assert sub.urls == ["A", "B", "C"]
        w = {(sub.urls[s], sub.urls[t]): x for s, t, x in sub.edges()}
        assert w == {("A", "B"): 2.0, ("A", "C"): 1.0, ("C", "A"): 1.0}
        assert "D" not in sub.index
        assert list(sub.origin) == [0, 1, 2]

    def test_counts_scaled(self):
        g = self.g()
        sub = induced_visited_subgraph(g, {("A", "C"): 20}, np.ones(g.n, bool))
        w = {(sub.urls[s], sub.urls[t]): x for s, t, x in sub.edges()}
        assert w[("A", "C")] == pytest.approx(2 + math.log(20), abs=1e-12)

    def test_isolated_visited_node_removed(self):
        g = LinkGraph.from_edges([("A", "B"), ("C", "D")])
        sub = induced_visited_subgraph(g, {}, visit_vector(g, ["A", "B", "C"]))
        assert sub.urls == ["A", "B"]

    def test_non_edge_count_rejected(self):
        g = self.g()
        with pytest.raises(ValueError):
            induced_visited_subgraph(g, {("B", "C"): 1}, np.ones(g.n, bool))

    def test_id_keys_accepted(self):
        g = self.g()
        sub = induced_visited_subgraph(g, {(0, 1): 1}, np.ones(g.n, bool))
        assert sub.out_edges(0)[0] == (1, 2.0)

    def test_bad_visit_length(self):
        with pytest.raises(ValueError):
            induced_visited_subgraph(self.g(), {}, [True])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 25), st.floats(0.05, 0.6))
def test_subgraph_degenerates_to_input(seed, n, density):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, density)
    sub = induced_visited_subgraph(g, {}, np.ones(g.n, bool))
    touched = {g.urls[s] for s, t, _ in g.edges()} | {g.urls[t] for s, t, _ in g.edges()}
    assert set(sub.urls) == touched
    assert {(sub.urls[s], sub.urls[t]) for s, t, _ in sub.edges()} == {
        (g.urls[s], g.urls[t]) for s, t, _ in g.edges()
    }
    assert np.all(sub.weights == 1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 25))
def test_subgraph_nodes_are_visited_and_weights_at_least_one(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.3)
    v = rng.random(n) < 0.6
    counts = {(g.urls[s], g.urls[t]): int(rng.integers(0, 5)) for s, t, _ in g.edges() if rng.random() < 0.5}
    sub = induced_visited_subgraph(g, counts, v)
    assert all(v[o] for o in sub.origin)
    assert np.all(sub.weights >= 1.0)
    has_edge = np.zeros(sub.n, bool)
    for s, t, _ in sub.edges():
        has_edge[s] = has_edge[t] = True
    assert has_edge.all()
