"""
Unit tests for same-cluster oracles.
"""

import pytest
from pydantic import ValidationError

from errors import OracleError
from exact import solve_exact
from graph import Clustering
from oracles import NoisyOracleSpec, make_noisy_oracle, make_optimal_oracle, make_truth_oracle
from tests.fixtures.test_data import random_graph

pytestmark = pytest.mark.unit


class TestClusteringOracle:
    def test_truth_answers_and_counts(self):
        o = make_truth_oracle(Clustering(assignment=(0, 0, 1)))
        assert o.kind == "truth"
        assert o.same_cluster(0, 1) is True
        assert o.same_cluster(1, 2) is False
        assert o.queries == 2

    def test_self_query_rejected(self):
        o = make_truth_oracle(Clustering.singletons(3))
        with pytest.raises(OracleError, match="itself"):
            o.same_cluster(1, 1)
        assert o.queries == 0

    def test_out_of_range_rejected(self):
        o = make_truth_oracle(Clustering.singletons(3))
        with pytest.raises(OracleError, match="out of range"):
            o.same_cluster(0, 3)

    def test_opt_makes_mistake(self, triangle_graph):
        o = make_optimal_oracle(triangle_graph)
        assert o.kind == "opt"
        # the optimum keeps all three together, so only the - edge {0, 2} is a mistake
        assert o.opt_makes_mistake(triangle_graph, 0, 2) is True
        assert o.opt_makes_mistake(triangle_graph, 0, 1) is False
        assert o.queries == 2

    def test_optimal_oracle_matches_exact_solver(self):
        g = random_graph(8, 0.5, seed=4)
        o = make_optimal_oracle(g)
        assert o.clustering == solve_exact(g).clustering

    def test_optimal_oracle_reuses_given_optimum(self, triangle_graph):
        given = Clustering(assignment=(0, 0, 1))
        o = make_optimal_oracle(triangle_graph, optimum=given)
        assert o.clustering is given


class TestNoisyOracle:
    def _spec(self, **overrides):
        fields = dict(base=Clustering(assignment=(0, 0, 0, 1, 1, 1)), per_answer_error_rate=0.3, votes=5, seed=1)
        fields.update(overrides)
        return NoisyOracleSpec(**fields)

    def test_zero_rate_is_the_truth(self):
        o = make_noisy_oracle(self._spec(per_answer_error_rate=0.0))
        base = o.spec.base
        for u in range(6):
            for v in range(u + 1, 6):
                assert o.same_cluster(u, v) == base.same_cluster(u, v)

    def test_certain_flip_inverts_the_truth(self):
        o = make_noisy_oracle(self._spec(per_answer_error_rate=1.0, votes=3))
        assert o.same_cluster(0, 1) is False
        assert o.same_cluster(0, 5) is True

    def test_answers_are_memoized_and_symmetric(self):
        o = make_noisy_oracle(self._spec())
        first = [o.same_cluster(u, v) for u in range(6) for v in range(u + 1, 6)]
        again = [o.same_cluster(v, u) for u in range(6) for v in range(u + 1, 6)]
        assert first == again
        assert o.queries == 30

    def test_answers_do_not_depend_on_query_order(self):
        pairs = [(u, v) for u in range(6) for v in range(u + 1, 6)]
        a = make_noisy_oracle(self._spec())
        b = make_noisy_oracle(self._spec())
        forward = {p: a.same_cluster(*p) for p in pairs}
        backward = {p: b.same_cluster(*p) for p in reversed(pairs)}
        assert forward == backward

    def test_even_votes_rejected(self):
        with pytest.raises(ValidationError, match="odd"):
            self._spec(votes=4)

    def test_rate_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            self._spec(per_answer_error_rate=1.5)

    def test_majority_vote_reduces_errors(self):
        n = 60
        base = Clustering(assignment=tuple(v // 6 for v in range(n)))
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]

        def error_count(votes):
            o = make_noisy_oracle(NoisyOracleSpec(base=base, per_answer_error_rate=0.2, votes=votes, seed=8))
            return sum(o.same_cluster(u, v) != base.same_cluster(u, v) for u, v in pairs)

        # 1770 pairs: ~354 expected errors with one vote, ~103 with five
        assert error_count(5) < error_count(1)
