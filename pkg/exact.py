"""
Exact minimum-disagreement clustering for small instances.

The search works one + component at a time: an optimal clustering never puts
vertices of different + components together. Inside a component, vertices are
assigned in ascending order to an existing cluster or a new one, so every
assignment vector is a restricted growth string. Components up to
``EXHAUSTIVE_LIMIT`` vertices are enumerated with cost-so-far pruning only;
larger ones use branch-and-bound with a look-ahead bound and a heuristic
incumbent. Among optima the lexicographically smallest canonical assignment
wins.
"""

import logging
import sys
from typing import Iterator, Optional

import numpy as np
from pydantic import BaseModel, Field

from errors import BudgetExceededError
from graph import Clustering, SignedGraph, canonicalize, count_disagreements, iter_bits, plus_components
from models import DEFAULT_NODE_BUDGET, EXHAUSTIVE_LIMIT

logger = logging.getLogger(__name__)

HEURISTIC_RESTARTS = 8


class ExactResult(BaseModel):
    clustering: Clustering = Field(..., description="Canonical optimal clustering")
    cost: int = Field(..., ge=0, description="C_OPT")
    nodes_explored: int = Field(0, ge=0, description="Search nodes visited")


def iter_set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Every set partition of ``[0, n)`` as a restricted growth string, in lexicographic order."""
    labels = [0] * n

    def extend(i: int, blocks: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(labels)
            return
        for label in range(blocks + 1 if i else 1):
            labels[i] = label
            yield from extend(i + 1, max(blocks, label + 1))

    yield from extend(0, 0)


def _suffix_packings(plus: list[int], m: int) -> list[int]:
    """Sizes of greedy edge-disjoint (+, +, -) packings on each suffix ``[d, m)``.

    Built from the back, so the packing of ``[d, m)`` extends the packing of
    ``[d + 1, m)`` with triangles whose smallest vertex is ``d``.
    """
    used = [0] * m
    packs = [0] * (m + 1)
    for d in range(m - 1, -1, -1):
        count = packs[d + 1]
        pd = plus[d]
        high = ((1 << m) - 1) >> (d + 1) << (d + 1)
        for x in iter_bits(high):
            if used[d] >> x & 1:
                continue
            above_x = high >> (x + 1) << (x + 1)
            if pd >> x & 1:
                cand = pd ^ plus[x]
            else:
                cand = pd & plus[x]
            cand &= above_x & ~used[d] & ~used[x]
            if not cand:
                continue
            y = (cand & -cand).bit_length() - 1
            used[d] |= (1 << x) | (1 << y)
            used[x] |= (1 << d) | (1 << y)
            used[y] |= (1 << d) | (1 << x)
            count += 1
        packs[d] = count
    return packs


def lower_bound_ppm(g: SignedGraph) -> int:
    """Size of a greedy edge-disjoint packing of (+, +, -) triangles.

    Every such triangle forces at least one mistake, so this is a lower bound
    on C_OPT.
    """
    plus = [g.plus_mask(u) for u in range(g.n)]
    return _suffix_packings(plus, g.n)[0]


def _local_cost(plus: list[int], assignment: list[int]) -> int:
    local = SignedGraph(len(plus), plus)
    return count_disagreements(local, Clustering(assignment=tuple(assignment)))


def _local_search(plus: list[int], assignment: list[int]) -> list[int]:
    """Move single vertices to their best cluster until no move improves."""
    m = len(plus)
    members: dict[int, int] = {}
    for v, label in enumerate(assignment):
        members[label] = members.get(label, 0) | (1 << v)
    next_label = max(members) + 1 if members else 0
    improved = True
    rounds = 0
    while improved and rounds < 4 * m + 10:
        improved = False
        rounds += 1
        for x in range(m):
            a = assignment[x]
            px = plus[x]
            stay = members[a].bit_count() - 1 - 2 * (px & (members[a] & ~(1 << x))).bit_count()
            best_delta = 0
            target = None
            if members[a] != 1 << x and -stay < best_delta:
                best_delta = -stay
                target = next_label
            for label, mask in members.items():
                if label == a:
                    continue
                delta = mask.bit_count() - 2 * (px & mask).bit_count() - stay
                if delta < best_delta:
                    best_delta = delta
                    target = label
            if target is None:
                continue
            members[a] &= ~(1 << x)
            if not members[a]:
                del members[a]
            if target == next_label:
                next_label += 1
            members[target] = members.get(target, 0) | (1 << x)
            assignment[x] = target
            improved = True
    return assignment


def _heuristic_incumbent(plus: list[int], m: int) -> tuple[int, tuple[int, ...]]:
    """Best of a few pivot clusterings polished by local search."""
    best: Optional[tuple[int, tuple[int, ...]]] = None
    for attempt in range(HEURISTIC_RESTARTS):
        order = range(m) if attempt == 0 else np.random.default_rng(attempt).permutation(m).tolist()
        remaining = (1 << m) - 1
        assignment = [-1] * m
        label = 0
        for pivot in order:
            if not remaining >> pivot & 1:
                continue
            cluster = (plus[pivot] & remaining) | (1 << pivot)
            for v in iter_bits(cluster):
                assignment[v] = label
            label += 1
            remaining &= ~cluster
        assignment = _local_search(plus, assignment)
        canonical = canonicalize(Clustering(assignment=tuple(assignment))).assignment
        candidate = (_local_cost(plus, list(canonical)), canonical)
        if best is None or candidate < best:
            best = candidate
    return best


class _NodeBudget:
    def __init__(self, limit: int, n: int):
        self.limit = limit
        self.n = n
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.limit:
            raise BudgetExceededError(self.limit, self.nodes, self.n)


def _solve_component(plus: list[int], budget: _NodeBudget, lookahead: bool) -> tuple[int, tuple[int, ...]]:
    m = len(plus)
    assignment = [0] * m
    sizes: list[int] = []
    masks: list[int] = []

    if lookahead:
        suffix_pack = _suffix_packings(plus, m)
        best_cost, best_assignment = _heuristic_incumbent(plus, m)
        logger.debug("Component of %d vertices: incumbent cost %d, root bound %d", m, best_cost, suffix_pack[0])
        if best_cost == suffix_pack[0] and best_assignment == (0,) * m:
            return best_cost, best_assignment
    else:
        suffix_pack = None
        best_cost, best_assignment = sys.maxsize, None

    def bound(d: int, cost: int) -> int:
        if not lookahead:
            return cost
        lb = cost + suffix_pack[d]
        assigned = (1 << d) - 1
        for x in range(d, m):
            px = plus[x]
            pa = (px & assigned).bit_count()
            cheapest = pa
            for c in range(len(masks)):
                val = sizes[c] + pa - 2 * (px & masks[c]).bit_count()
                if val < cheapest:
                    cheapest = val
            lb += cheapest
        return lb

    def pruned(lb: int, depth: int) -> bool:
        if lb > best_cost:
            return True
        if lb == best_cost and best_assignment is not None:
            return tuple(assignment[:depth]) > best_assignment[:depth]
        return False

    def dfs(d: int, cost: int) -> None:
        nonlocal best_cost, best_assignment
        budget.tick()
        if d == m:
            candidate = tuple(assignment)
            if cost < best_cost or (cost == best_cost and (best_assignment is None or candidate < best_assignment)):
                best_cost, best_assignment = cost, candidate
            return
        pd = plus[d]
        pa = (pd & ((1 << d) - 1)).bit_count()
        options = [(sizes[c] + pa - 2 * (pd & masks[c]).bit_count(), c) for c in range(len(masks))]
        options.append((pa, len(masks)))
        options.sort()
        for delta, c in options:
            new_cost = cost + delta
            if c == len(masks):
                sizes.append(1)
                masks.append(1 << d)
            else:
                sizes[c] += 1
                masks[c] |= 1 << d
            assignment[d] = c
            if not pruned(bound(d + 1, new_cost), d + 1):
                dfs(d + 1, new_cost)
            if sizes[c] == 1:
                sizes.pop()
                masks.pop()
            else:
                sizes[c] -= 1
                masks[c] &= ~(1 << d)

    limit = sys.getrecursionlimit()
    if m + 100 > limit:
        sys.setrecursionlimit(m + 100)
    try:
        dfs(0, 0)
    finally:
        sys.setrecursionlimit(limit)
    return best_cost, best_assignment


def solve_exact(
    g: SignedGraph,
    budget: int = DEFAULT_NODE_BUDGET,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
) -> ExactResult:
    """Minimum-disagreement clustering of ``g``.

    Raises ``BudgetExceededError`` when the search visits more than ``budget``
    nodes; no heuristic answer is ever returned in its place.
    """
    counter = _NodeBudget(budget, g.n)
    assignment = [0] * g.n
    total_cost = 0
    next_label = 0
    for component in plus_components(g):
        if len(component) == 1:
            assignment[component[0]] = next_label
            next_label += 1
            continue
        index = {v: i for i, v in enumerate(component)}
        comp_mask = sum(1 << v for v in component)
        local_plus = []
        for v in component:
            local = 0
            for w in iter_bits(g.plus_mask(v) & comp_mask):
                local |= 1 << index[w]
            local_plus.append(local)
        lookahead = len(component) > exhaustive_limit
        cost, local_assignment = _solve_component(local_plus, counter, lookahead)
        total_cost += cost
        for v, label in zip(component, local_assignment):
            assignment[v] = next_label + label
        next_label += max(local_assignment) + 1
    clustering = canonicalize(Clustering(assignment=tuple(assignment)))
    logger.debug("Exact solve on n=%d: cost %d after %d nodes", g.n, total_cost, counter.nodes)
    return ExactResult(clustering=clustering, cost=total_cost, nodes_explored=counter.nodes)
