"""
Unit tests for signed graphs, clusterings, disagreement counting and
(+, +, -) triangle enumeration.
"""

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from errors import GraphError
from graph import (
    Clustering,
    SignedGraph,
    TriangleShape,
    build_graph,
    canonicalize,
    count_disagreements,
    count_pair_disagreements,
    disagreement_edges,
    enumerate_ppm_triangles,
    plus_components,
)
from tests.fixtures.test_data import TOY_GRAPHS, naive_disagreements, naive_ppm_triangles, random_graph, toy_graph

pytestmark = pytest.mark.unit


@st.composite
def graph_and_clustering(draw, max_n=9):
    n = draw(st.integers(min_value=0, max_value=max_n))
    pairs = list(combinations(range(n), 2))
    signs = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    labels = draw(st.lists(st.integers(min_value=0, max_value=n), min_size=n, max_size=n))
    g = build_graph(n, [p for p, s in zip(pairs, signs) if s])
    return g, Clustering(assignment=tuple(labels))


class TestSignedGraph:
    """Construction and neighbourhood queries."""

    def test_build_graph_basic(self):
        g = build_graph(4, [(0, 1), (2, 1)])
        assert g.n == 4
        assert g.num_plus_edges == 2
        assert g.num_pairs == 6
        assert g.is_plus(1, 0) and g.is_plus(1, 2)
        assert not g.is_plus(0, 2)
        assert g.plus_neighbors(1) == [0, 2]
        assert g.minus_neighbors(1) == [3]
        assert g.degree(1) == 2
        assert g.plus_edges() == [(0, 1), (1, 2)]

    def test_duplicate_edges_collapse(self):
        g = build_graph(3, [(0, 1), (1, 0), (0, 1)])
        assert g.num_plus_edges == 1

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="Self-loop"):
            build_graph(3, [(1, 1)])

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphError, match="out of range"):
            build_graph(3, [(0, 3)])

    def test_asymmetric_masks_rejected(self):
        with pytest.raises(GraphError, match="symmetric"):
            SignedGraph(2, [0b10, 0b00])

    def test_empty_graph(self):
        g = build_graph(0, [])
        assert g.n == 0
        assert g.num_plus_edges == 0
        assert plus_components(g) == []

    def test_equality_and_hash(self):
        a = build_graph(3, [(0, 1)])
        b = build_graph(3, [(1, 0)])
        assert a == b
        assert hash(a) == hash(b)
        assert a != build_graph(3, [(0, 2)])

    def test_check_vertex(self):
        g = build_graph(2, [])
        with pytest.raises(GraphError):
            g.check_vertex(2)


class TestClustering:
    """Clustering helpers and canonical form."""

    def test_negative_label_rejected(self):
        with pytest.raises(ValidationError):
            Clustering(assignment=(0, -1))

    def test_frozen(self):
        c = Clustering(assignment=(0, 1))
        with pytest.raises(ValidationError):
            c.assignment = (0, 0)

    def test_from_clusters(self):
        c = Clustering.from_clusters([[2, 0], [1]], 3)
        assert c.assignment == (0, 1, 0)
        assert c.clusters() == [[0, 2], [1]]
        assert c.sizes() == [2, 1]
        assert c.num_clusters == 2

    def test_from_clusters_rejects_overlap_and_gaps(self):
        with pytest.raises(GraphError, match="more than one"):
            Clustering.from_clusters([[0, 1], [1]], 2)
        with pytest.raises(GraphError, match="not covered"):
            Clustering.from_clusters([[0]], 2)

    def test_canonicalize_relabels_by_first_appearance(self):
        c = canonicalize(Clustering(assignment=(7, 3, 7, 9, 3)))
        assert c.assignment == (0, 1, 0, 2, 1)

    @pytest.mark.property
    @given(st.lists(st.integers(min_value=0, max_value=6), max_size=12))
    def test_canonicalize_is_idempotent_and_keeps_partition(self, labels):
        c = Clustering(assignment=tuple(labels))
        once = canonicalize(c)
        assert canonicalize(once) == once
        assert count_pair_disagreements(c, once) == 0


class TestDisagreements:
    """Cost of a clustering against a signed graph."""

    @pytest.mark.parametrize("name", sorted(TOY_GRAPHS))
    def test_extremes_on_toy_graphs(self, name):
        g = toy_graph(name)
        assert count_disagreements(g, Clustering.singletons(g.n)) == g.num_plus_edges
        assert count_disagreements(g, Clustering.single_cluster(g.n)) == g.num_pairs - g.num_plus_edges

    def test_triangle_costs(self, triangle_graph):
        assert count_disagreements(triangle_graph, Clustering(assignment=(0, 0, 0))) == 1
        assert count_disagreements(triangle_graph, Clustering(assignment=(0, 0, 1))) == 1
        assert count_disagreements(triangle_graph, Clustering(assignment=(0, 1, 2))) == 2

    def test_size_mismatch(self, triangle_graph):
        with pytest.raises(GraphError):
            count_disagreements(triangle_graph, Clustering(assignment=(0, 0)))

    @pytest.mark.property
    @settings(max_examples=200)
    @given(graph_and_clustering())
    def test_matches_pairwise_definition(self, data):
        g, c = data
        assert count_disagreements(g, c) == naive_disagreements(g, c)
        assert len(disagreement_edges(g, c)) == count_disagreements(g, c)

    @pytest.mark.property
    @given(graph_and_clustering())
    def test_relabelling_does_not_change_cost(self, data):
        g, c = data
        shifted = Clustering(assignment=tuple(label + 5 for label in c.assignment))
        assert count_disagreements(g, shifted) == count_disagreements(g, c)

    def test_disagreement_edges_lists_pairs(self, triangle_graph):
        assert disagreement_edges(triangle_graph, Clustering(assignment=(0, 0, 0))) == [(0, 2)]
        assert disagreement_edges(triangle_graph, Clustering(assignment=(0, 1, 2))) == [(0, 1), (1, 2)]


class TestPairDisagreements:
    """Distance between two clusterings."""

    def test_identical_partitions(self):
        a = Clustering(assignment=(0, 0, 1))
        b = Clustering(assignment=(4, 4, 2))
        assert count_pair_disagreements(a, b) == 0

    def test_merge_versus_split(self):
        a = Clustering.single_cluster(4)
        b = Clustering.singletons(4)
        assert count_pair_disagreements(a, b) == 6

    def test_mismatched_sizes(self):
        with pytest.raises(GraphError):
            count_pair_disagreements(Clustering.singletons(2), Clustering.singletons(3))

    @pytest.mark.property
    @given(graph_and_clustering())
    def test_equals_cost_on_the_graph_of_the_other(self, data):
        _, c = data
        other = Clustering(assignment=tuple(label // 2 for label in c.assignment))
        plus = [(u, v) for u, v in combinations(range(c.n), 2) if other.same_cluster(u, v)]
        assert count_pair_disagreements(c, other) == count_disagreements(build_graph(c.n, plus), c)


class TestTriangles:
    """(+, +, -) triangle enumeration through a pivot."""

    def test_single_triangle_shapes(self, triangle_graph):
        assert [(t.v, t.w, t.shape) for t in enumerate_ppm_triangles(triangle_graph, 1)] == [
            (0, 2, TriangleShape.PLUS_PLUS)
        ]
        assert [(t.v, t.w, t.shape) for t in enumerate_ppm_triangles(triangle_graph, 0)] == [
            (1, 2, TriangleShape.PLUS_MINUS)
        ]
        assert [(t.v, t.w, t.shape) for t in enumerate_ppm_triangles(triangle_graph, 2)] == [
            (0, 1, TriangleShape.MINUS_PLUS)
        ]

    def test_endpoints(self, triangle_graph):
        (t,) = enumerate_ppm_triangles(triangle_graph, 2)
        assert t.plus_endpoint == 1
        assert t.minus_endpoint == 0
        (pp,) = enumerate_ppm_triangles(triangle_graph, 1)
        assert pp.minus_endpoint is None

    def test_clique_has_no_bad_triangles(self):
        g = toy_graph("complete5")
        assert all(enumerate_ppm_triangles(g, p) == [] for p in range(g.n))

    def test_active_subset(self, star_graph):
        assert len(enumerate_ppm_triangles(star_graph, 0)) == 3
        assert len(enumerate_ppm_triangles(star_graph, 0, active=[0, 1, 2])) == 1
        assert len(enumerate_ppm_triangles(star_graph, 0, active=0b0011)) == 0

    def test_inactive_pivot_rejected(self, star_graph):
        with pytest.raises(GraphError, match="not in the active"):
            enumerate_ppm_triangles(star_graph, 0, active=[1, 2])

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_exhaustive_scan(self, seed):
        g = random_graph(10, 0.45, seed)
        active = [v for v in range(g.n) if (v * 7 + seed) % 4 != 0] + [seed % g.n]
        active = sorted(set(active))
        for pivot in active:
            got = [(t.v, t.w, t.shape.value) for t in enumerate_ppm_triangles(g, pivot, active)]
            assert got == naive_ppm_triangles(g, pivot, active)


class TestComponents:
    def test_components_ordered_by_minimum(self):
        g = build_graph(6, [(0, 4), (4, 2), (1, 5)])
        assert plus_components(g) == [[0, 2, 4], [1, 5], [3]]
