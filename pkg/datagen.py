"""
Synthetic planted-partition instances, noise models, weighted-graph
thresholding and the text file formats.

File formats (UTF-8, ``#`` starts a comment line, blank lines ignored):

* signed graph: ``n m`` then ``m`` lines ``u v s`` with ``s`` in ``+``/``-``;
  unlisted pairs are -.
* weighted graph: ``n m`` then ``m`` lines ``u v w`` with ``w`` in [0, 1].
* clustering: ``n`` lines ``vertex cluster_id``.
"""

import logging
import math
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from errors import GraphError, InstanceFormatError
from graph import Clustering, SignedGraph, build_graph
from models import (
    LARGE_FAMILIES,
    SMALL_FLIP_BUDGET,
    Family,
    FamilySpec,
    NoiseModel,
    NoiseSpec,
)

logger = logging.getLogger(__name__)

PLUS_THRESHOLD = 0.5
S_FAMILY_SIZES = [5] * 5 + [15] * 4 + [30]

PathLike = Union[str, Path]


def _family_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 0])


def _noise_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1])


def _normal_sizes(spec: FamilySpec, rng: np.random.Generator) -> list[int]:
    sizes = []
    while len(sizes) < spec.normal_count:
        size = int(round(rng.normal(spec.normal_mean, spec.normal_sd)))
        if size >= spec.normal_min_size:
            sizes.append(size)
    return sizes


def _dirichlet_sizes(spec: FamilySpec, rng: np.random.Generator) -> list[int]:
    """Largest-remainder apportionment of a Dirichlet draw, at least 1 per cluster."""
    shares = rng.dirichlet(spec.dirichlet_alpha) * spec.dirichlet_total
    sizes = [int(math.floor(s)) for s in shares]
    leftover = spec.dirichlet_total - sum(sizes)
    by_fraction = sorted(range(len(sizes)), key=lambda i: (-(shares[i] - sizes[i]), i))
    for i in by_fraction[:leftover]:
        sizes[i] += 1
    for i, size in enumerate(sizes):
        if size == 0:
            donor = max(range(len(sizes)), key=lambda j: (sizes[j], -j))
            sizes[donor] -= 1
            sizes[i] = 1
    return sizes


def _skew_sizes(n: int) -> list[int]:
    """~log2 n large clusters, ~sqrt n moderate ones, then a tail of pairs."""
    if n < 2:
        return [n]
    log_n = math.log2(n)
    big_count = max(1, int(math.floor(log_n)))
    big_size = max(1, int(math.floor(n / log_n)))
    mid = math.isqrt(n)
    sizes = []
    left = n
    for count, size in ((big_count, big_size), (mid, mid)):
        for _ in range(count):
            if left < size:
                break
            sizes.append(size)
            left -= size
    while left >= 2:
        sizes.append(2)
        left -= 2
    if left:
        sizes.append(1)
    return sizes


def _sqrtn_sizes(n: int) -> list[int]:
    """floor(sqrt n) clusters of floor(sqrt n); any remainder spread one vertex at a time."""
    s = math.isqrt(n)
    sizes = [s] * s
    for i in range(n - s * s):
        sizes[i % s] += 1
    return sizes


def cluster_sizes(spec: FamilySpec) -> list[int]:
    if spec.family == Family.S:
        return list(S_FAMILY_SIZES)
    if spec.family == Family.EXPLICIT:
        return list(spec.sizes)
    if spec.family == Family.N:
        return _normal_sizes(spec, _family_rng(spec.seed))
    if spec.family == Family.D:
        return _dirichlet_sizes(spec, _family_rng(spec.seed))
    n = spec.n or 900
    if spec.family == Family.SKEW:
        return _skew_sizes(n)
    return _sqrtn_sizes(n)


def generate_planted(spec: FamilySpec) -> tuple[SignedGraph, Clustering]:
    """Disjoint + cliques with contiguous vertex ids, and the matching truth."""
    sizes = cluster_sizes(spec)
    if any(s <= 0 for s in sizes):
        raise GraphError(f"Family {spec.family.value} produced non-positive sizes {sizes}")
    n = sum(sizes)
    masks = [0] * n
    assignment = []
    start = 0
    for label, size in enumerate(sizes):
        block = ((1 << size) - 1) << start
        for v in range(start, start + size):
            masks[v] = block & ~(1 << v)
        assignment.extend([label] * size)
        start += size
    logger.info("Generated %s family: %d vertices in %d clusters", spec.family.value, n, len(sizes))
    return SignedGraph(n, masks), Clustering(assignment=tuple(assignment))


def resolve_flip_budget(spec: NoiseSpec, n: int, family: Optional[Family] = None) -> int:
    """L: explicit budget, else floor(ell2 * C(n, 2)) on large families and 100 otherwise."""
    if spec.flip_budget is not None:
        return spec.flip_budget
    if family in LARGE_FAMILIES:
        return int(math.floor(round(spec.ell2 * n * (n - 1) / 2, 9)))
    return SMALL_FLIP_BUDGET


def _sample(rng: np.random.Generator, available: int, wanted: int, stratum: str) -> np.ndarray:
    if wanted > available:
        logger.warning("Flip budget %d exceeds %d available pairs in %s; clamping", wanted, available, stratum)
        wanted = available
    if wanted <= 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(available, size=wanted, replace=False)


def noise_flips(
    g: SignedGraph, truth: Clustering, spec: NoiseSpec, family: Optional[Family] = None
) -> list[tuple[int, int]]:
    """Pairs whose labels the noise model flips, in sampling order."""
    if truth.n != g.n:
        raise GraphError(f"Truth covers {truth.n} vertices but the graph has {g.n}")
    if spec.model == NoiseModel.NONE:
        return []
    budget = resolve_flip_budget(spec, g.n, family)
    rng = _noise_rng(spec.seed)
    flips: list[tuple[int, int]] = []
    if spec.model == NoiseModel.I:
        us, vs = np.triu_indices(g.n, k=1)
        picked = _sample(rng, len(us), budget, "the whole graph")
        return [(int(us[i]), int(vs[i])) for i in picked]

    clusters = truth.clusters()
    per_clique = budget // len(clusters) if clusters else 0
    for members in clusters:
        size = len(members)
        iu, iv = np.triu_indices(size, k=1)
        wanted = min(per_clique, size - 1)
        for i in _sample(rng, len(iu), wanted, f"a clique of {size}"):
            flips.append((members[iu[i]], members[iv[i]]))
    if spec.model == NoiseModel.III:
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                ca, cb = clusters[a], clusters[b]
                wanted = int(math.ceil(round(spec.ell1 * len(ca) * len(cb), 9)))
                for i in _sample(rng, len(ca) * len(cb), wanted, "a clique pair"):
                    flips.append((ca[i // len(cb)], cb[i % len(cb)]))
    return flips


def apply_noise(
    g: SignedGraph, truth: Clustering, spec: NoiseSpec, family: Optional[Family] = None
) -> SignedGraph:
    """Flip labels per noise model I, II or III; ``none`` returns ``g`` unchanged.

    I flips ``min(L, C(n, 2))`` uniformly sampled distinct pairs. II flips
    ``min(L // k, |C_i| - 1)`` distinct pairs inside each clique. III adds
    ``ceil(ell1 * |C_i| * |C_j|)`` distinct pairs between each clique pair.
    """
    flips = noise_flips(g, truth, spec, family)
    if not flips:
        return g
    masks = [g.plus_mask(u) for u in range(g.n)]
    for u, v in flips:
        masks[u] ^= 1 << v
        masks[v] ^= 1 << u
    logger.info("Noise model %s flipped %d pairs", spec.model.value, len(flips))
    return SignedGraph(g.n, masks)


def threshold_weighted(pairs: Iterable[Sequence], n: int) -> SignedGraph:
    """+ iff weight >= 1/2; missing pairs count as weight 0."""
    weights: dict[tuple[int, int], float] = {}
    for u, v, w in pairs:
        u, v, w = int(u), int(v), float(w)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"Pair {{{u}, {v}}} has a vertex out of range [0, {n})")
        if u == v:
            raise GraphError(f"Self-loop pair {{{u}, {v}}}")
        if not 0.0 <= w <= 1.0:
            raise GraphError(f"Weight {w} of pair {{{u}, {v}}} is outside [0, 1]")
        key = (min(u, v), max(u, v))
        if key in weights and weights[key] != w:
            raise GraphError(f"Pair {key} listed with conflicting weights {weights[key]} and {w}")
        weights[key] = w
    return build_graph(n, [key for key, w in weights.items() if w >= PLUS_THRESHOLD])


def _data_lines(path: Path) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield line_no, line.split()


def _ints(tokens: Sequence[str], path: Path, line_no: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise InstanceFormatError(f"Expected integers, got {' '.join(tokens)!r}", path, line_no) from None


def _read_header(lines: Iterator[tuple[int, list[str]]], path: Path) -> tuple[int, int]:
    try:
        line_no, tokens = next(lines)
    except StopIteration:
        raise InstanceFormatError("Missing 'n m' header", path) from None
    if len(tokens) != 2:
        raise InstanceFormatError("Header must be 'n m'", path, line_no)
    n, m = _ints(tokens, path, line_no)
    if n < 0 or m < 0:
        raise InstanceFormatError("Header values must be non-negative", path, line_no)
    return n, m


def _check_pair(u: int, v: int, n: int, path: Path, line_no: int) -> tuple[int, int]:
    if not (0 <= u < n and 0 <= v < n):
        raise InstanceFormatError(f"Vertex out of range [0, {n}) in pair ({u}, {v})", path, line_no)
    if u == v:
        raise InstanceFormatError(f"Self-loop on vertex {u}", path, line_no)
    return (u, v) if u < v else (v, u)


def read_graph(path: PathLike) -> SignedGraph:
    path = Path(path)
    lines = _data_lines(path)
    n, m = _read_header(lines, path)
    labels: dict[tuple[int, int], str] = {}
    count = 0
    for line_no, tokens in lines:
        if len(tokens) != 3 or tokens[2] not in ("+", "-"):
            raise InstanceFormatError("Edge lines must be 'u v s' with s in {+, -}", path, line_no)
        u, v = _ints(tokens[:2], path, line_no)
        key = _check_pair(u, v, n, path, line_no)
        if labels.get(key, tokens[2]) != tokens[2]:
            raise InstanceFormatError(f"Pair {key} listed with both signs", path, line_no)
        labels[key] = tokens[2]
        count += 1
    if count != m:
        raise InstanceFormatError(f"Header announces {m} edge lines, found {count}", path)
    return build_graph(n, [key for key, sign in labels.items() if sign == "+"])


def write_graph(g: SignedGraph, path: PathLike) -> None:
    edges = g.plus_edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{u} {v} +" for u, v in edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_clustering(path: PathLike) -> Clustering:
    path = Path(path)
    labels: dict[int, int] = {}
    for line_no, tokens in _data_lines(path):
        if len(tokens) != 2:
            raise InstanceFormatError("Clustering lines must be 'vertex cluster_id'", path, line_no)
        v, c = _ints(tokens, path, line_no)
        if v < 0 or c < 0:
            raise InstanceFormatError("Vertex and cluster ids must be non-negative", path, line_no)
        if v in labels:
            raise InstanceFormatError(f"Vertex {v} assigned twice", path, line_no)
        labels[v] = c
    n = len(labels)
    if sorted(labels) != list(range(n)):
        raise InstanceFormatError(f"Vertices must be exactly 0..{n - 1}", path)
    return Clustering(assignment=tuple(labels[v] for v in range(n)))


def write_clustering(c: Clustering, path: PathLike) -> None:
    lines = [f"{v} {label}" for v, label in enumerate(c.assignment)]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_weighted(path: PathLike) -> tuple[int, list[tuple[int, int, float]]]:
    path = Path(path)
    lines = _data_lines(path)
    n, m = _read_header(lines, path)
    pairs = []
    seen: dict[tuple[int, int], float] = {}
    for line_no, tokens in lines:
        if len(tokens) != 3:
            raise InstanceFormatError("Weighted lines must be 'u v w'", path, line_no)
        u, v = _ints(tokens[:2], path, line_no)
        try:
            w = float(tokens[2])
        except ValueError:
            raise InstanceFormatError(f"Weight {tokens[2]!r} is not a number", path, line_no) from None
        if not 0.0 <= w <= 1.0:
            raise InstanceFormatError(f"Weight {w} outside [0, 1]", path, line_no)
        key = _check_pair(u, v, n, path, line_no)
        if seen.get(key, w) != w:
            raise InstanceFormatError(f"Pair {key} listed with conflicting weights", path, line_no)
        seen[key] = w
        pairs.append((u, v, w))
    if len(pairs) != m:
        raise InstanceFormatError(f"Header announces {m} weighted lines, found {len(pairs)}", path)
    return n, pairs


def load_weighted_graph(path: PathLike) -> SignedGraph:
    n, pairs = read_weighted(path)
    return threshold_weighted(pairs, n)


def read_named_weighted(path: PathLike) -> tuple[SignedGraph, list[str]]:
    """Headerless ``name_u name_v weight`` lines; names get dense ids by first appearance."""
    path = Path(path)
    index: dict[str, int] = {}
    pairs = []
    for line_no, tokens in _data_lines(path):
        if len(tokens) != 3:
            raise InstanceFormatError("Named weighted lines must be 'name_u name_v w'", path, line_no)
        ids = []
        for name in tokens[:2]:
            if name not in index:
                index[name] = len(index)
            ids.append(index[name])
        try:
            w = float(tokens[2])
        except ValueError:
            raise InstanceFormatError(f"Weight {tokens[2]!r} is not a number", path, line_no) from None
        if ids[0] == ids[1]:
            raise InstanceFormatError(f"Self-loop on {tokens[0]!r}", path, line_no)
        pairs.append((ids[0], ids[1], w))
    try:
        graph = threshold_weighted(pairs, len(index))
    except GraphError as e:
        raise InstanceFormatError(str(e), path) from e
    return graph, list(index)
