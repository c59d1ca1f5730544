"""
Pivot algorithms: QueryPivot, RandomQueryPivot(p) and the query-free ACN pivot.

All three repeatedly pick a pivot among the remaining vertices, decide which
remaining vertices join it, and recurse on the rest. The query algorithms
correct the pivot's + neighbourhood with oracle answers gathered on the
(+, +, -) triangles through the pivot.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from errors import GraphError
from graph import (
    Clustering,
    SignedGraph,
    Triangle,
    TriangleShape,
    canonicalize,
    count_disagreements,
    iter_bits,
    ppm_triangles_masked,
)
from oracles import Oracle

logger = logging.getLogger(__name__)


class RunOutcome(BaseModel):
    clustering: Clustering = Field(..., description="Canonical output partition")
    queries: int = Field(..., ge=0, description="Oracle calls issued during the run")
    mistakes: int = Field(..., ge=0, description="Disagreements of the output with the graph")
    seed: Optional[int] = Field(None, description="Run seed (entropy actually used)")
    parameter_p: Optional[float] = Field(None, description="Engagement probability for rqp")


class TriangleStep(BaseModel):
    pivot: int
    v: int
    w: int
    shape: TriangleShape
    engaged: bool = Field(..., description="False when skipped")
    queries: int = Field(..., description="Oracle calls issued for this triangle")
    new_mistakes: int = Field(..., description="Triangle edges newly decided as mistakes")


class RunTrace(BaseModel):
    """Optional instrumentation of a run."""

    pivots: list[int] = []
    steps: list[TriangleStep] = []
    # queried pivot edges per pivot, as (pivot, other)
    queried_edges: list[tuple[int, int]] = []


def _check_oracle(g: SignedGraph, o: Oracle) -> None:
    if o.n != g.n:
        raise GraphError(f"Oracle covers {o.n} vertices but the graph has {g.n}")


def _finish(g: SignedGraph, clusters: list[int], queries: int, seed=None, p=None) -> RunOutcome:
    assignment = [0] * g.n
    for label, mask in enumerate(clusters):
        for v in iter_bits(mask):
            assignment[v] = label
    clustering = canonicalize(Clustering(assignment=tuple(assignment)))
    return RunOutcome(
        clustering=clustering,
        queries=queries,
        mistakes=count_disagreements(g, clustering),
        seed=seed,
        parameter_p=p,
    )


def _pivot_cluster(g: SignedGraph, pivot: int, remaining: int, mistakes: int) -> int:
    """A vertex joins the pivot iff (+ edge and no mistake) or (- edge and mistake)."""
    return (1 << pivot) | ((g.plus_mask(pivot) & remaining) ^ mistakes)


def _streams(seed: Optional[int]) -> tuple[int, np.random.Generator, np.random.Generator]:
    """Pivot and coin generators from one run seed.

    ACN and RandomQueryPivot share the pivot stream contract: the same seed
    yields the same pivot sequence whenever the remaining sets agree.
    """
    root = np.random.SeedSequence(seed)
    pivot_seq, coin_seq = root.spawn(2)
    return root.entropy, np.random.default_rng(pivot_seq), np.random.default_rng(coin_seq)


def _random_pivot(rng: np.random.Generator, remaining: int) -> int:
    members = list(iter_bits(remaining))
    return members[int(rng.integers(len(members)))]


def query_pivot(
    g: SignedGraph,
    o: Oracle,
    pivot_order: Optional[Sequence[int]] = None,
    trace: Optional[RunTrace] = None,
) -> RunOutcome:
    """QueryPivot: recovers the oracle's clustering when the oracle is optimal.

    The pivot is the lowest remaining vertex, or the first remaining vertex of
    ``pivot_order`` when one is given. Triangles are handled in ascending
    ``(v, w)`` order; within one pivot each edge is queried at most once.
    """
    _check_oracle(g, o)
    if pivot_order is not None and sorted(pivot_order) != list(range(g.n)):
        raise GraphError("pivot_order must be a permutation of the vertices")
    start_queries = o.queries
    remaining = (1 << g.n) - 1
    clusters: list[int] = []
    order_pos = 0
    while remaining:
        if pivot_order is None:
            pivot = (remaining & -remaining).bit_length() - 1
        else:
            while not remaining >> pivot_order[order_pos] & 1:
                order_pos += 1
            pivot = pivot_order[order_pos]
        queried = 0
        mistakes = 0
        for t in ppm_triangles_masked(g, pivot, remaining):
            v_bit, w_bit = 1 << t.v, 1 << t.w
            if (mistakes & v_bit) or (mistakes & w_bit):
                _record(trace, t, False, 0, 0)
                continue
            if (queried & v_bit) and (queried & w_bit):
                _record(trace, t, False, 0, 0)
                continue
            asked = 0
            flagged = 0
            if not queried & v_bit:
                queried |= v_bit
                asked += 1
                _record_query(trace, pivot, t.v)
                if o.opt_makes_mistake(g, pivot, t.v):
                    mistakes |= v_bit
                    flagged += 1
            if not queried & w_bit and not mistakes & v_bit:
                queried |= w_bit
                asked += 1
                _record_query(trace, pivot, t.w)
                if o.opt_makes_mistake(g, pivot, t.w):
                    mistakes |= w_bit
                    flagged += 1
            if not mistakes & (v_bit | w_bit):
                # both pivot edges settled as kept: the opposite edge is the mistake
                flagged += 1
            _record(trace, t, True, asked, flagged)
        cluster = _pivot_cluster(g, pivot, remaining, mistakes)
        if trace is not None:
            trace.pivots.append(pivot)
        logger.debug("qp pivot %d: cluster of %d", pivot, cluster.bit_count())
        clusters.append(cluster)
        remaining &= ~cluster
    return _finish(g, clusters, o.queries - start_queries)


def random_query_pivot(
    g: SignedGraph,
    o: Oracle,
    p: float,
    seed: Optional[int] = None,
    trace: Optional[RunTrace] = None,
) -> RunOutcome:
    """RandomQueryPivot(p): a uniformly random pivot; each triangle engaged with probability p.

    Engaged (+, +) triangles query both pivot edges. Engaged (+, -) triangles
    query the + edge, and the - edge only when the + edge is not a mistake.
    Answers are memoized for the lifetime of one pivot.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    _check_oracle(g, o)
    entropy, pivot_rng, coin_rng = _streams(seed)
    start_queries = o.queries
    remaining = (1 << g.n) - 1
    clusters: list[int] = []
    while remaining:
        pivot = _random_pivot(pivot_rng, remaining)
        answers: dict[int, bool] = {}
        mistakes = 0

        def ask(x: int) -> bool:
            if x not in answers:
                answers[x] = o.opt_makes_mistake(g, pivot, x)
                _record_query(trace, pivot, x)
            return answers[x]

        for t in ppm_triangles_masked(g, pivot, remaining):
            engaged = p >= 1.0 or (p > 0.0 and coin_rng.random() < p)
            if not engaged:
                _record(trace, t, False, 0, 0)
                continue
            before_asked = len(answers)
            before = mistakes
            if t.shape is TriangleShape.PLUS_PLUS:
                if ask(t.v):
                    mistakes |= 1 << t.v
                if ask(t.w):
                    mistakes |= 1 << t.w
            else:
                plus_end, minus_end = t.plus_endpoint, t.minus_endpoint
                if ask(plus_end):
                    mistakes |= 1 << plus_end
                elif ask(minus_end):
                    mistakes |= 1 << minus_end
            flagged = (mistakes & ~before).bit_count()
            _record(trace, t, True, len(answers) - before_asked, flagged)
        cluster = _pivot_cluster(g, pivot, remaining, mistakes)
        if trace is not None:
            trace.pivots.append(pivot)
        clusters.append(cluster)
        remaining &= ~cluster
    return _finish(g, clusters, o.queries - start_queries, seed=entropy, p=p)


def acn_pivot(g: SignedGraph, seed: Optional[int] = None, trace: Optional[RunTrace] = None) -> RunOutcome:
    """Query-free pivot: a random pivot takes all of its remaining + neighbours."""
    entropy, pivot_rng, _ = _streams(seed)
    remaining = (1 << g.n) - 1
    clusters: list[int] = []
    while remaining:
        pivot = _random_pivot(pivot_rng, remaining)
        cluster = _pivot_cluster(g, pivot, remaining, 0)
        if trace is not None:
            trace.pivots.append(pivot)
        clusters.append(cluster)
        remaining &= ~cluster
    return _finish(g, clusters, 0, seed=entropy)


def _record(trace: Optional[RunTrace], t: Triangle, engaged: bool, queries: int, new_mistakes: int) -> None:
    if trace is not None:
        trace.steps.append(
            TriangleStep(
                pivot=t.pivot, v=t.v, w=t.w, shape=t.shape,
                engaged=engaged, queries=queries, new_mistakes=new_mistakes,
            )
        )


def _record_query(trace: Optional[RunTrace], pivot: int, other: int) -> None:
    if trace is not None:
        trace.queried_edges.append((pivot, other))

