"""
Unit tests for QueryPivot, RandomQueryPivot and the ACN pivot.
"""

import numpy as np
import pytest

from algorithms import RunTrace, acn_pivot, query_pivot, random_query_pivot
from errors import GraphError
from exact import solve_exact
from graph import Clustering, TriangleShape, build_graph, count_disagreements
from oracles import make_optimal_oracle, make_truth_oracle
from tests.fixtures.test_data import TOY_GRAPHS, mixed_small_graphs, random_graph, toy_graph

pytestmark = pytest.mark.unit


class TestQueryPivot:
    """Deterministic pivot with an optimal oracle."""

    def test_triangle(self, triangle_graph):
        outcome = query_pivot(triangle_graph, make_optimal_oracle(triangle_graph))
        assert outcome.clustering.assignment == (0, 0, 0)
        assert outcome.mistakes == 1
        assert outcome.queries == 2

    def test_star(self, star_graph):
        o = make_optimal_oracle(star_graph)
        outcome = query_pivot(star_graph, o)
        assert outcome.clustering == o.clustering
        assert outcome.mistakes == 2
        assert outcome.queries <= 4

    def test_no_bad_triangles_means_no_queries(self):
        g = toy_graph("two_cliques")
        outcome = query_pivot(g, make_optimal_oracle(g))
        assert outcome.queries == 0
        assert outcome.mistakes == 0
        assert outcome.clustering.assignment == (0, 0, 0, 1, 1, 1)

    @pytest.mark.parametrize("name", sorted(TOY_GRAPHS))
    def test_recovers_optimum_on_toys(self, name):
        g = toy_graph(name)
        o = make_optimal_oracle(g)
        outcome = query_pivot(g, o)
        assert outcome.clustering == o.clustering
        assert outcome.mistakes == TOY_GRAPHS[name][2]
        assert outcome.queries <= 2 * outcome.mistakes

    @pytest.mark.parametrize("graph_index", range(30))
    def test_recovers_optimum_on_random_graphs(self, graph_index):
        g = mixed_small_graphs(30, seed=5)[graph_index]
        optimum = solve_exact(g)
        o = make_optimal_oracle(g, optimum=optimum.clustering)
        outcome = query_pivot(g, o)
        assert outcome.clustering == optimum.clustering
        assert outcome.mistakes == optimum.cost
        assert outcome.queries <= 2 * optimum.cost

    def test_pivot_order(self):
        g = random_graph(8, 0.5, seed=3)
        o = make_optimal_oracle(g)
        trace = RunTrace()
        order = [7, 6, 5, 4, 3, 2, 1, 0]
        outcome = query_pivot(g, o, pivot_order=order, trace=trace)
        assert trace.pivots[0] == 7
        assert outcome.clustering == o.clustering

    @pytest.mark.parametrize("graph_index", range(40))
    def test_recovers_optimum_under_random_pivot_orders(self, graph_index):
        g = mixed_small_graphs(40, seed=808)[graph_index]
        optimum = solve_exact(g)
        rng = np.random.default_rng(graph_index)
        for _ in range(5):
            order = [int(v) for v in rng.permutation(g.n)]
            o = make_optimal_oracle(g, optimum=optimum.clustering)
            trace = RunTrace()
            outcome = query_pivot(g, o, pivot_order=order, trace=trace)
            assert outcome.clustering == optimum.clustering
            assert outcome.queries <= 2 * optimum.cost
            for step in trace.steps:
                if step.engaged:
                    # every engaged triangle pays with at least one mistake
                    assert 1 <= step.queries <= 2
                    assert step.new_mistakes >= 1
                else:
                    assert step.queries == 0
                    assert step.new_mistakes == 0

    def test_bad_pivot_order(self, triangle_graph):
        with pytest.raises(GraphError, match="permutation"):
            query_pivot(triangle_graph, make_optimal_oracle(triangle_graph), pivot_order=[0, 0, 1])

    def test_oracle_size_mismatch(self, triangle_graph):
        with pytest.raises(GraphError):
            query_pivot(triangle_graph, make_truth_oracle(Clustering.singletons(4)))

    def test_queries_each_pivot_edge_once(self):
        g = random_graph(9, 0.5, seed=12)
        trace = RunTrace()
        query_pivot(g, make_optimal_oracle(g), trace=trace)
        assert len(trace.queried_edges) == len(set(trace.queried_edges))
        assert sum(step.queries for step in trace.steps) == len(trace.queried_edges)

    def test_empty_graph(self):
        g = build_graph(0, [])
        outcome = query_pivot(g, make_truth_oracle(Clustering(assignment=())))
        assert outcome.clustering.assignment == ()
        assert outcome.queries == 0


class TestRandomQueryPivot:
    def test_p_zero_never_queries(self):
        g = random_graph(9, 0.5, seed=2)
        o = make_optimal_oracle(g)
        for seed in range(10):
            assert random_query_pivot(g, o, 0.0, seed=seed).queries == 0
        assert o.queries == 0

    def test_p_zero_equals_acn(self):
        g = random_graph(12, 0.4, seed=6)
        o = make_optimal_oracle(g)
        for seed in range(20):
            assert random_query_pivot(g, o, 0.0, seed=seed).clustering == acn_pivot(g, seed=seed).clustering

    def test_invalid_p(self, triangle_graph):
        o = make_optimal_oracle(triangle_graph)
        with pytest.raises(ValueError):
            random_query_pivot(triangle_graph, o, 1.5, seed=0)
        with pytest.raises(ValueError):
            random_query_pivot(triangle_graph, o, -0.1, seed=0)

    def test_same_seed_same_run(self):
        g = random_graph(10, 0.5, seed=7)
        o = make_optimal_oracle(g)
        a = random_query_pivot(g, o, 0.5, seed=42)
        b = random_query_pivot(g, o, 0.5, seed=42)
        assert a.clustering == b.clustering
        assert a.queries == b.queries
        assert a.seed == 42
        assert a.parameter_p == 0.5

    def test_fresh_entropy_is_recorded(self, triangle_graph):
        o = make_optimal_oracle(triangle_graph)
        first = random_query_pivot(triangle_graph, o, 0.5)
        replay = random_query_pivot(triangle_graph, o, 0.5, seed=first.seed)
        assert first.seed is not None
        assert replay.clustering == first.clustering
        assert replay.queries == first.queries

    def test_p_one_engages_every_triangle(self):
        g = random_graph(9, 0.5, seed=4)
        trace = RunTrace()
        random_query_pivot(g, make_optimal_oracle(g), 1.0, seed=3, trace=trace)
        assert trace.steps
        assert all(step.engaged for step in trace.steps)

    def test_answers_memoized_within_a_pivot(self):
        g = random_graph(9, 0.5, seed=21)
        trace = RunTrace()
        outcome = random_query_pivot(g, make_optimal_oracle(g), 1.0, seed=5, trace=trace)
        assert len(trace.queried_edges) == len(set(trace.queried_edges))
        assert sum(step.queries for step in trace.steps) == outcome.queries

    def test_plus_minus_triangle_skips_minus_edge_after_mistake(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        o = make_truth_oracle(Clustering(assignment=(0, 1, 1)))
        for seed in range(10):
            trace = RunTrace()
            random_query_pivot(g, o, 1.0, seed=seed, trace=trace)
            for step in trace.steps:
                if step.shape is TriangleShape.PLUS_PLUS or step.pivot != 0:
                    continue
                # {0, 1} is + across truth clusters, so {0, 2} is never asked
                assert step.queries == 1
                assert (0, 2) not in trace.queried_edges

    def test_mistakes_against_graph(self):
        g = random_graph(10, 0.5, seed=8)
        outcome = random_query_pivot(g, make_optimal_oracle(g), 0.25, seed=1)
        assert outcome.mistakes == count_disagreements(g, outcome.clustering)

    @pytest.mark.parametrize("graph_index", range(20))
    def test_p_one_recovers_optimum(self, graph_index):
        g = mixed_small_graphs(20, seed=909)[graph_index]
        optimum = solve_exact(g)
        for seed in range(5):
            o = make_optimal_oracle(g, optimum=optimum.clustering)
            outcome = random_query_pivot(g, o, 1.0, seed=seed)
            assert outcome.clustering == optimum.clustering

    def test_optimal_at_p_one_on_a_triangle(self, triangle_graph):
        # with every triangle engaged the optimal oracle fixes the only bad triangle
        for seed in range(10):
            outcome = random_query_pivot(triangle_graph, make_optimal_oracle(triangle_graph), 1.0, seed=seed)
            assert outcome.mistakes == 1


class TestACN:
    def test_no_queries_and_valid_partition(self):
        g = random_graph(10, 0.5, seed=1)
        outcome = acn_pivot(g, seed=3)
        assert outcome.queries == 0
        assert outcome.clustering.n == 10
        assert outcome.mistakes == count_disagreements(g, outcome.clustering)

    def test_clusters_are_pivot_neighbourhoods(self):
        g = random_graph(10, 0.5, seed=2)
        trace = RunTrace()
        outcome = acn_pivot(g, seed=9, trace=trace)
        remaining = set(range(g.n))
        for pivot in trace.pivots:
            cluster = {v for v in remaining if v == pivot or g.is_plus(pivot, v)}
            assert {v for v in range(g.n) if outcome.clustering.same_cluster(v, pivot)} == cluster
            remaining -= cluster
        assert not remaining

    def test_disjoint_cliques_recovered(self):
        g = toy_graph("two_cliques")
        for seed in range(5):
            assert acn_pivot(g, seed=seed).mistakes == 0
