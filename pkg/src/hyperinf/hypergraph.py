"""m-uniform hypergraphs, hypervertex cuts, and Cheeger constants.

A hypervertex is an (m/2)-subset of vertices, stored as a sorted tuple.
Hyperedges are disjoint unions of two hypervertices; a cut of the
hypervertex set therefore induces a boundary of crossing hyperedges.

Two boundary semantics coexist (the source definitions disagree):
  * EDGE_SET   -- the boundary is the *set* of hyperedges that admit at
                  least one crossing disjoint split (the default);
  * PAIR_COUNT -- the boundary measure is the number of crossing
                  (h1, h2) splits, counting multiplicity per hyperedge.
For m=2 the two coincide on simple graphs.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .tensors import SUPPORTED_ORDERS

EXACT_CHEEGER_GUARD = 24  # max hypervertex count for exhaustive enumeration


class HypergraphError(ValueError):
    pass


class BoundarySemantics(Enum):
    EDGE_SET = "edge-set"
    PAIR_COUNT = "pair-count"


@dataclass(frozen=True)
class UniformHypergraph:
    n: int
    m: int
    edges: tuple  # tuple of sorted m-tuples of distinct vertices

    def __post_init__(self):
        if self.m not in SUPPORTED_ORDERS:
            raise HypergraphError(f"edge order m={self.m} not supported (need m in {SUPPORTED_ORDERS})")
        if self.n < self.m:
            raise HypergraphError(f"need n >= m, got n={self.n}, m={self.m}")
        seen = set()
        for e in self.edges:
            if len(e) != self.m or len(set(e)) != self.m:
                raise HypergraphError(f"edge {e} must have exactly {self.m} distinct vertices")
            if list(e) != sorted(e):
                raise HypergraphError(f"edge {e} is not in sorted canonical form")
            if any(not 0 <= v < self.n for v in e):
                raise HypergraphError(f"edge {e} has vertex out of range [0, {self.n})")
            if e in seen:
                raise HypergraphError(f"duplicate edge {e}")
            seen.add(e)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, self.m), dtype=np.int64)
        return np.ascontiguousarray(np.array(self.edges, dtype=np.int64))

    def to_json_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "UniformHypergraph":
        edges = tuple(tuple(int(v) for v in e) for e in obj["edges"])
        return cls(int(obj["n"]), int(obj["m"]), edges)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str) -> "UniformHypergraph":
        return cls.from_json_dict(json.loads(text))


def make_graph(n: int, m: int, edges) -> UniformHypergraph:
    canon = sorted({tuple(sorted(int(v) for v in e)) for e in edges})
    return UniformHypergraph(n, m, tuple(canon))


@dataclass
class CutReport:
    set_size: int
    boundary_edges: list
    pair_count: int
    expansion: float
    semantics: BoundarySemantics
    cut_set: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "set_size": self.set_size,
            "boundary_edges": [list(e) for e in self.boundary_edges],
            "pair_count": self.pair_count,
            "expansion": self.expansion,
            "semantics": self.semantics.value,
            "cut_set": [list(h) for h in self.cut_set],
        }


def induced_hypervertices(graph: UniformHypergraph) -> list:
    """All C(n, m/2) hypervertices in lexicographic order."""
    return list(itertools.combinations(range(graph.n), graph.m // 2))


def edge_splits(graph: UniformHypergraph):
    """For each edge, the unordered disjoint (h1, h2) splits with h1 < h2."""
    half = graph.m // 2
    out = []
    for e in graph.edges:
        splits = []
        rest = set(e)
        for h1 in itertools.combinations(e, half):
            h2 = tuple(sorted(rest - set(h1)))
            if h1 < h2:
                splits.append((h1, h2))
        out.append(splits)
    return out


def _measure(graph, members, semantics):
    """Boundary edges and crossing-pair count for a hypervertex set."""
    boundary_edges = []
    pair_count = 0
    for e, splits in zip(graph.edges, edge_splits(graph)):
        crossings = sum(1 for h1, h2 in splits if (h1 in members) != (h2 in members))
        if crossings:
            boundary_edges.append(e)
            pair_count += crossings
    return boundary_edges, pair_count


def boundary(graph: UniformHypergraph, cut_set, semantics=BoundarySemantics.EDGE_SET) -> CutReport:
    members = {tuple(sorted(h)) for h in cut_set}
    if not members:
        raise HypergraphError("cut set must be non-empty")
    hv = set(induced_hypervertices(graph))
    if not members <= hv:
        raise HypergraphError("cut set contains non-hypervertices")
    boundary_edges, pair_count = _measure(graph, members, semantics)
    measure = len(boundary_edges) if semantics is BoundarySemantics.EDGE_SET else pair_count
    return CutReport(
        set_size=len(members),
        boundary_edges=boundary_edges,
        pair_count=pair_count,
        expansion=measure / len(members),
        semantics=semantics,
        cut_set=sorted(members),
    )


def _split_bit_pairs(graph: UniformHypergraph):
    """Per edge, crossing splits as (bit position of h1, bit position of h2)."""
    pos = {h: i for i, h in enumerate(induced_hypervertices(graph))}
    return [[(pos[h1], pos[h2]) for h1, h2 in splits] for splits in edge_splits(graph)]


def cheeger_exact(graph: UniformHypergraph, semantics=BoundarySemantics.EDGE_SET):
    """Exact Cheeger constant by enumerating all cut sets up to floor(N/2).

    Ties are broken by (set size, lexicographic hypervertex order), which is
    the enumeration order used here.
    """
    hv = induced_hypervertices(graph)
    big_n = len(hv)
    if big_n > EXACT_CHEEGER_GUARD:
        raise HypergraphError(
            f"N={big_n} hypervertices exceeds the enumeration guard "
            f"({EXACT_CHEEGER_GUARD}); use cheeger_sweep for an upper bound"
        )
    pairs = _split_bit_pairs(graph)
    edge_pairs = [(e, ps) for e, ps in zip(graph.edges, pairs)]

    best_phi = math.inf
    best_set = None
    for size in range(1, big_n // 2 + 1):
        for combo in itertools.combinations(range(big_n), size):
            mask = 0
            for i in combo:
                mask |= 1 << i
            measure = 0
            for _, ps in edge_pairs:
                crossings = sum(
                    1 for a, b in ps if ((mask >> a) & 1) != ((mask >> b) & 1)
                )
                if semantics is BoundarySemantics.EDGE_SET:
                    measure += 1 if crossings else 0
                else:
                    measure += crossings
            phi = measure / size
            if phi < best_phi:
                best_phi = phi
                best_set = [hv[i] for i in combo]
                if best_phi == 0.0:
                    return 0.0, best_set
    return best_phi, best_set


def cheeger_sweep(graph: UniformHypergraph, v, semantics=BoundarySemantics.EDGE_SET) -> CutReport:
    """Best prefix cut after sorting hypervertices by mean v-value.

    Always an upper bound on the exact Cheeger constant.  Ties in v-value
    are broken by hypervertex lexicographic order.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (graph.n,):
        raise HypergraphError(f"vector shape {v.shape} != ({graph.n},)")
    hv = induced_hypervertices(graph)
    order = sorted(range(len(hv)), key=lambda i: (float(np.mean(v[list(hv[i])])), hv[i]))
    best = None
    members = set()
    for t in range(len(hv) // 2):
        members.add(hv[order[t]])
        boundary_edges, pair_count = _measure(graph, members, semantics)
        measure = len(boundary_edges) if semantics is BoundarySemantics.EDGE_SET else pair_count
        phi = measure / len(members)
        if best is None or phi < best.expansion:
            best = CutReport(
                set_size=len(members),
                boundary_edges=boundary_edges,
                pair_count=pair_count,
                expansion=phi,
                semantics=semantics,
                cut_set=sorted(members),
            )
    return best


# ---------------------------------------------------------------------------
# Generators


def complete(n: int, m: int) -> UniformHypergraph:
    return UniformHypergraph(n, m, tuple(itertools.combinations(range(n), m)))


def erdos_renyi(n: int, m: int, prob: float, seed: int) -> UniformHypergraph:
    if not 0.0 <= prob <= 1.0:
        raise HypergraphError(f"prob={prob} outside [0, 1]")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    edges = tuple(
        e for e in itertools.combinations(range(n), m) if rng.uniform() < prob
    )
    return UniformHypergraph(n, m, edges)


def regular_like(n: int, m: int, d: int, seed: int):
    """Best-effort d-regular-ish hypergraph via repeated random matchings.

    Each round randomly pairs disjoint hypervertex halves into edges, so
    every vertex gains roughly one incident edge per round; d rounds target
    hypervertex degree about d.  Returns (graph, achieved degree spread per
    hypervertex as {min, max, mean}).
    """
    if d < 1:
        raise HypergraphError(f"d={d} must be >= 1")
    if n < m:
        raise HypergraphError(f"need n >= m, got n={n}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    edges = set()
    for _ in range(d):
        verts = list(rng.permutation(n))
        while len(verts) >= m:
            e = tuple(sorted(verts[:m]))
            verts = verts[m:]
            edges.add(e)
    graph = UniformHypergraph(n, m, tuple(sorted(edges)))
    hv = induced_hypervertices(graph)
    degree = {h: 0 for h in hv}
    for splits in edge_splits(graph):
        for h1, h2 in splits:
            degree[h1] += 1
            degree[h2] += 1
    counts = np.array(list(degree.values()), dtype=float)
    spread = {"min": float(counts.min()), "max": float(counts.max()), "mean": float(counts.mean())}
    return graph, spread


def two_blocks_bridged(n: int, m: int, bridges: int, seed: int) -> UniformHypergraph:
    """Two complete blocks (sizes ceil(n/2), floor(n/2)) plus crossing edges."""
    size_a = (n + 1) // 2
    size_b = n - size_a
    if min(size_a, size_b) < m:
        raise HypergraphError(
            f"blocks of sizes {size_a}/{size_b} cannot hold complete m={m} sub-hypergraphs"
        )
    block_a = list(range(size_a))
    block_b = list(range(size_a, n))
    edges = set(itertools.combinations(block_a, m)) | set(
        itertools.combinations(block_b, m)
    )
    crossing = [
        e
        for e in itertools.combinations(range(n), m)
        if any(v < size_a for v in e) and any(v >= size_a for v in e)
    ]
    if bridges > len(crossing):
        raise HypergraphError(f"only {len(crossing)} crossing edges exist, asked for {bridges}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    picks = rng.choice(len(crossing), size=bridges, replace=False) if bridges else []
    for i in sorted(int(i) for i in np.atleast_1d(picks)):
        edges.add(crossing[i])
    return UniformHypergraph(n, m, tuple(sorted(edges)))
