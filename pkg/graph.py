"""
Signed complete graphs, clusterings, disagreement counting and
(+, +, -) triangle enumeration.

Only the + adjacency is stored, one integer bitmask per vertex. Every pair that
is not a + edge is a - edge.
"""

from collections import Counter
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from errors import GraphError


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


class SignedGraph:
    """Immutable complete graph on ``n`` vertices with a +/- label per pair."""

    __slots__ = ("_n", "_plus", "_num_plus")

    def __init__(self, n: int, plus_masks: Sequence[int]):
        if n < 0:
            raise GraphError(f"Vertex count must be non-negative, got {n}")
        if len(plus_masks) != n:
            raise GraphError(f"Expected {n} adjacency masks, got {len(plus_masks)}")
        full = (1 << n) - 1
        for u, mask in enumerate(plus_masks):
            if mask & ~full:
                raise GraphError(f"Vertex {u} has a neighbour outside [0, {n})")
            if mask >> u & 1:
                raise GraphError(f"Self-loop on vertex {u}")
            for v in iter_bits(mask):
                if not plus_masks[v] >> u & 1:
                    raise GraphError(f"+ adjacency is not symmetric on {{{u}, {v}}}")
        self._n = n
        self._plus = tuple(plus_masks)
        self._num_plus = sum(m.bit_count() for m in self._plus) // 2

    @property
    def n(self) -> int:
        return self._n

    @property
    def num_plus_edges(self) -> int:
        """|E+|."""
        return self._num_plus

    @property
    def num_pairs(self) -> int:
        return self._n * (self._n - 1) // 2

    def plus_mask(self, u: int) -> int:
        return self._plus[u]

    def plus_neighbors(self, u: int) -> list[int]:
        """N+(u) in ascending order."""
        return list(iter_bits(self._plus[u]))

    def minus_neighbors(self, u: int) -> list[int]:
        """N-(u) in ascending order."""
        full = (1 << self._n) - 1
        return list(iter_bits(full & ~self._plus[u] & ~(1 << u)))

    def is_plus(self, u: int, v: int) -> bool:
        return bool(self._plus[u] >> v & 1)

    def degree(self, u: int) -> int:
        return self._plus[u].bit_count()

    def plus_edges(self) -> list[tuple[int, int]]:
        """All + edges as ``(u, v)`` with ``u < v``, sorted."""
        return [(u, v) for u in range(self._n) for v in iter_bits(self._plus[u] >> (u + 1) << (u + 1))]

    def check_vertex(self, u: int) -> None:
        if not 0 <= u < self._n:
            raise GraphError(f"Vertex {u} out of range [0, {self._n})")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignedGraph):
            return NotImplemented
        return self._n == other._n and self._plus == other._plus

    def __hash__(self) -> int:
        return hash((self._n, self._plus))

    def __repr__(self) -> str:
        return f"SignedGraph(n={self._n}, plus_edges={self._num_plus})"

    def __getstate__(self):
        return (self._n, self._plus)

    def __setstate__(self, state):
        n, plus = state
        self._n = n
        self._plus = plus
        self._num_plus = sum(m.bit_count() for m in plus) // 2


def build_graph(n: int, plus_edges: Iterable[Sequence[int]]) -> SignedGraph:
    """Build a graph on ``n`` vertices whose + edges are exactly ``plus_edges``.

    Duplicate pairs (in either orientation) collapse into one edge.
    """
    if n < 0:
        raise GraphError(f"Vertex count must be non-negative, got {n}")
    masks = [0] * n
    for pair in plus_edges:
        u, v = pair
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"Edge {{{u}, {v}}} has a vertex out of range [0, {n})")
        if u == v:
            raise GraphError(f"Self-loop pair {{{u}, {v}}}")
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return SignedGraph(n, masks)


class Clustering(BaseModel):
    """A partition of ``[0, n)`` given as a vertex -> cluster id assignment."""

    model_config = ConfigDict(frozen=True)

    assignment: tuple[int, ...] = Field(..., description="Cluster id of each vertex")

    @field_validator("assignment")
    @classmethod
    def validate_assignment(cls, v):
        for label in v:
            if label < 0:
                raise ValueError("Cluster ids must be non-negative integers")
        return v

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[int]], n: int) -> "Clustering":
        """Build from explicit clusters; they must be disjoint and cover ``[0, n)``."""
        assignment = [-1] * n
        for cid, members in enumerate(clusters):
            for v in members:
                if not 0 <= v < n:
                    raise GraphError(f"Vertex {v} out of range [0, {n})")
                if assignment[v] != -1:
                    raise GraphError(f"Vertex {v} appears in more than one cluster")
                assignment[v] = cid
        missing = [v for v, c in enumerate(assignment) if c == -1]
        if missing:
            raise GraphError(f"Vertices {missing[:5]} are not covered by any cluster")
        return cls(assignment=tuple(assignment))

    @classmethod
    def singletons(cls, n: int) -> "Clustering":
        return cls(assignment=tuple(range(n)))

    @classmethod
    def single_cluster(cls, n: int) -> "Clustering":
        return cls(assignment=(0,) * n)

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def num_clusters(self) -> int:
        return len(set(self.assignment))

    def same_cluster(self, u: int, v: int) -> bool:
        return self.assignment[u] == self.assignment[v]

    def clusters(self) -> list[list[int]]:
        """Clusters ordered by their smallest member, members ascending."""
        groups: dict[int, list[int]] = {}
        for v, label in enumerate(self.assignment):
            groups.setdefault(label, []).append(v)
        return list(groups.values())

    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters()]


def canonicalize(c: Clustering) -> Clustering:
    """Relabel clusters by order of first appearance."""
    relabel: dict[int, int] = {}
    canonical = []
    for label in c.assignment:
        if label not in relabel:
            relabel[label] = len(relabel)
        canonical.append(relabel[label])
    return Clustering(assignment=tuple(canonical))


def _check_sizes(g: SignedGraph, c: Clustering) -> None:
    if c.n != g.n:
        raise GraphError(f"Clustering covers {c.n} vertices but the graph has {g.n}")


def count_disagreements(g: SignedGraph, c: Clustering) -> int:
    """Intra-cluster - edges plus inter-cluster + edges."""
    _check_sizes(g, c)
    cluster_masks: dict[int, int] = {}
    for v, label in enumerate(c.assignment):
        cluster_masks[label] = cluster_masks.get(label, 0) | (1 << v)
    intra_pairs = 0
    intra_plus_twice = 0
    for mask in cluster_masks.values():
        size = mask.bit_count()
        intra_pairs += size * (size - 1) // 2
        for v in iter_bits(mask):
            intra_plus_twice += (g.plus_mask(v) & mask).bit_count()
    intra_plus = intra_plus_twice // 2
    return (intra_pairs - intra_plus) + (g.num_plus_edges - intra_plus)


def disagreement_edges(g: SignedGraph, c: Clustering) -> list[tuple[int, int]]:
    """Every pair ``(u, v)``, ``u < v``, whose label contradicts ``c``."""
    _check_sizes(g, c)
    a = c.assignment
    return [
        (u, v)
        for u in range(g.n)
        for v in range(u + 1, g.n)
        if g.is_plus(u, v) != (a[u] == a[v])
    ]


def count_pair_disagreements(a: Clustering, b: Clustering) -> int:
    """Number of pairs co-clustered in exactly one of ``a`` and ``b``."""
    if a.n != b.n:
        raise GraphError(f"Clusterings cover {a.n} and {b.n} vertices")

    def together(counts: Iterable[int]) -> int:
        return sum(k * (k - 1) // 2 for k in counts)

    in_a = together(Counter(a.assignment).values())
    in_b = together(Counter(b.assignment).values())
    in_both = together(Counter(zip(a.assignment, b.assignment)).values())
    return in_a + in_b - 2 * in_both


class TriangleShape(str, Enum):
    """Labels of the two pivot edges; the opposite edge makes it (+, +, -)."""

    PLUS_PLUS = "++"  # {pivot,v} +, {pivot,w} +, {v,w} -
    PLUS_MINUS = "+-"  # {pivot,v} +, {pivot,w} -, {v,w} +
    MINUS_PLUS = "-+"  # {pivot,v} -, {pivot,w} +, {v,w} +


class Triangle(NamedTuple):
    pivot: int
    v: int
    w: int
    shape: TriangleShape

    @property
    def plus_endpoint(self) -> int:
        """An endpoint joined to the pivot by a + edge."""
        return self.w if self.shape is TriangleShape.MINUS_PLUS else self.v

    @property
    def minus_endpoint(self) -> Optional[int]:
        if self.shape is TriangleShape.PLUS_MINUS:
            return self.w
        if self.shape is TriangleShape.MINUS_PLUS:
            return self.v
        return None


def ppm_triangles_masked(g: SignedGraph, pivot: int, active: int) -> list[Triangle]:
    """(+, +, -) triangles through ``pivot`` inside the ``active`` bitmask.

    Each triangle is found from a + endpoint of the pivot, so the work per pivot
    is O(|N+(pivot)| * n) word operations.
    """
    pivot_bit = 1 << pivot
    plus_p = g.plus_mask(pivot) & active
    minus_p = active & ~plus_p & ~pivot_bit
    found: list[Triangle] = []
    for v in iter_bits(plus_p):
        plus_v = g.plus_mask(v)
        above_v = plus_p >> (v + 1) << (v + 1)
        for w in iter_bits(above_v & ~plus_v):
            found.append(Triangle(pivot, v, w, TriangleShape.PLUS_PLUS))
        for w in iter_bits(minus_p & plus_v):
            if v < w:
                found.append(Triangle(pivot, v, w, TriangleShape.PLUS_MINUS))
            else:
                found.append(Triangle(pivot, w, v, TriangleShape.MINUS_PLUS))
    found.sort(key=lambda t: (t.v, t.w))
    return found


def enumerate_ppm_triangles(
    g: SignedGraph, pivot: int, active: Union[Iterable[int], int, None] = None
) -> list[Triangle]:
    """All (+, +, -) triangles ``(pivot, v, w)`` with ``v < w`` drawn from ``active``.

    ``active`` defaults to every vertex. Triangles come in ascending ``(v, w)``
    order, each exactly once.
    """
    g.check_vertex(pivot)
    if active is None:
        active_mask = (1 << g.n) - 1
    elif isinstance(active, int):
        active_mask = active
    else:
        active_mask = 0
        for v in active:
            g.check_vertex(v)
            active_mask |= 1 << v
    if not active_mask >> pivot & 1:
        raise GraphError(f"Pivot {pivot} is not in the active vertex set")
    return ppm_triangles_masked(g, pivot, active_mask)


def plus_components(g: SignedGraph) -> list[list[int]]:
    """Connected components of the + graph, each ascending, ordered by minimum."""
    unseen = (1 << g.n) - 1
    components = []
    while unseen:
        start = (unseen & -unseen).bit_length() - 1
        comp = 1 << start
        frontier = comp
        while frontier:
            reach = 0
            for v in iter_bits(frontier):
                reach |= g.plus_mask(v)
            frontier = reach & ~comp
            comp |= frontier
        unseen &= ~comp
        components.append(list(iter_bits(comp)))
    return components
