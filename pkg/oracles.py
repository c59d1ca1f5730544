"""
Same-cluster oracles.

An oracle answers "are u and v in the same cluster?" from a clustering it
commits to up front. Every call to ``same_cluster`` counts as one query.
"""

import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from errors import OracleError
from exact import solve_exact
from graph import Clustering, SignedGraph
from models import DEFAULT_NODE_BUDGET

logger = logging.getLogger(__name__)


class Oracle:
    """Base oracle with query accounting."""

    kind = "oracle"

    def __init__(self, n: int):
        self.n = n
        self.queries = 0

    def _answer(self, u: int, v: int) -> bool:
        raise NotImplementedError

    def same_cluster(self, u: int, v: int) -> bool:
        if u == v:
            raise OracleError(f"Cannot query a vertex against itself ({u})")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise OracleError(f"Query ({u}, {v}) out of range [0, {self.n})")
        self.queries += 1
        return self._answer(u, v)

    def opt_makes_mistake(self, g: SignedGraph, u: int, v: int) -> bool:
        """True iff the oracle's clustering disagrees with the label of ``{u, v}``."""
        return self.same_cluster(u, v) != g.is_plus(u, v)


class ClusteringOracle(Oracle):
    """Answers from one fixed clustering (optimal or ground truth)."""

    def __init__(self, clustering: Clustering, kind: str = "truth"):
        super().__init__(clustering.n)
        self.clustering = clustering
        self.kind = kind

    def _answer(self, u: int, v: int) -> bool:
        return self.clustering.same_cluster(u, v)


class NoisyOracleSpec(BaseModel):
    base: Clustering = Field(..., description="Clustering the crowd is asked about")
    per_answer_error_rate: float = Field(..., ge=0, le=1, description="Probability one answer is flipped")
    votes: int = Field(..., description="Annotators per question; the majority wins")
    seed: int = Field(0, ge=0, description="Crowd seed")

    @field_validator("votes")
    @classmethod
    def validate_votes(cls, v):
        if v < 1 or v % 2 == 0:
            raise ValueError("votes must be an odd positive integer")
        return v


class NoisyOracle(Oracle):
    """Majority vote over independently corrupted annotator answers.

    Each unordered pair is one crowd task: its answer is drawn once from a
    stream keyed by ``(seed, u, v)`` and memoized, so the full answer table
    does not depend on query order.
    """

    kind = "noisy"

    def __init__(self, spec: NoisyOracleSpec):
        super().__init__(spec.base.n)
        self.spec = spec
        self._memo: dict[tuple[int, int], bool] = {}

    def _answer(self, u: int, v: int) -> bool:
        key = (u, v) if u < v else (v, u)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        truth = self.spec.base.same_cluster(u, v)
        rng = np.random.default_rng([self.spec.seed, key[0], key[1]])
        wrong = int(np.count_nonzero(rng.random(self.spec.votes) < self.spec.per_answer_error_rate))
        answer = truth if 2 * wrong < self.spec.votes else not truth
        self._memo[key] = answer
        return answer


def make_truth_oracle(c: Clustering) -> ClusteringOracle:
    return ClusteringOracle(c, kind="truth")


def make_optimal_oracle(
    g: SignedGraph, budget: int = DEFAULT_NODE_BUDGET, optimum: Optional[Clustering] = None
) -> ClusteringOracle:
    """Oracle backed by the exact solver's canonical optimum.

    ``optimum`` skips the solve when the caller already holds it.
    """
    if optimum is None:
        optimum = solve_exact(g, budget=budget).clustering
    return ClusteringOracle(optimum, kind="opt")


def make_noisy_oracle(spec: NoisyOracleSpec) -> NoisyOracle:
    logger.debug(
        "Noisy oracle: rate %.3f, %d votes, seed %d", spec.per_answer_error_rate, spec.votes, spec.seed
    )
    return NoisyOracle(spec)
