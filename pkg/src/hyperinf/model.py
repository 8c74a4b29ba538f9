"""Generative observation model and closed-form failure-bound calculators.

Randomness: PCG64 seeded through SeedSequence, with one child stream per
edge orbit (keyed by the edge's vertex tuple) and one per node, so draws do
not depend on edge iteration order.  One draw decides the sign of a whole
edge orbit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .hypergraph import UniformHypergraph
from .tensors import SymmetricTensor


class ModelError(ValueError):
    pass


@dataclass
class Observation:
    x: SymmetricTensor  # entries in {-1, 0, +1}, nonzero exactly on edges
    z: np.ndarray  # noisy node labels in {-1, +1}
    p: float
    q: float
    seed: int
    n: int
    m: int

    def to_json_dict(self) -> dict:
        return {
            "X": self.x.to_json_dict(),
            "z": [int(v) for v in self.z],
            "p": self.p,
            "q": self.q,
            "seed": self.seed,
            "graph_ref": {"n": self.n, "m": self.m},
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Observation":
        x = SymmetricTensor.from_json_dict(obj["X"])
        z = np.array(obj["z"], dtype=float)
        ref = obj.get("graph_ref", {})
        return cls(
            x=x,
            z=z,
            p=float(obj["p"]),
            q=float(obj["q"]),
            seed=int(obj["seed"]),
            n=int(ref.get("n", x.n)),
            m=int(ref.get("m", x.m)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str) -> "Observation":
        return cls.from_json_dict(json.loads(text))


def _edge_flip(seed: int, edge) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 1) + tuple(edge))))


def _node_flip(seed: int, node: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 2, node))))


def sample_observation(graph: UniformHypergraph, y_star, p: float, q: float, seed: int) -> Observation:
    if not 0.0 <= p < 1.0 or not 0.0 <= q < 1.0:
        raise ModelError(f"flip probabilities must lie in [0, 1): p={p}, q={q}")
    y_star = np.asarray(y_star, dtype=float)
    if y_star.shape != (graph.n,) or not np.all(np.abs(y_star) == 1.0):
        raise ModelError("ground truth must be a length-n vector of +/-1")
    x = SymmetricTensor(graph.m, graph.n)
    for e in graph.edges:
        clean = float(np.prod(y_star[list(e)]))
        flip = _edge_flip(seed, e).uniform() < p
        x.set(e, -clean if flip else clean)
    z = y_star.copy()
    for i in range(graph.n):
        if _node_flip(seed, i).uniform() < q:
            z[i] = -z[i]
    return Observation(x=x, z=z, p=p, q=q, seed=seed, n=graph.n, m=graph.m)


def epsilon1(phi: float, n: int, p: float, edge_count: int, m: int, proof_variant: bool = False) -> float:
    """Stage-one failure bound.

    The displayed bound carries a 16*(1-p) numerator in the second term;
    the derivation's intermediate step carries 16*p*(1-p).  The displayed
    version is the default; proof_variant=True selects the other.
    """
    if not 0.0 <= p < 0.5:
        raise ModelError(f"bound requires p in [0, 0.5), got {p}")
    if phi <= 0.0:
        raise ModelError(f"bound requires phi > 0, got {phi}")
    if n < m:
        raise ModelError(f"need n >= m, got n={n}, m={m}")
    shrink = (1.0 - 2.0 * p) ** 2 * phi ** (2 * m)
    first = 2.0 * n**m * math.exp(-shrink / (8.0 * n**m * max(edge_count, n ** (m - 1))))
    numerator = 16.0 * p * (1.0 - p) if proof_variant else 16.0 * (1.0 - p)
    second = numerator * edge_count / shrink
    return first + second


def epsilon2(n: int, q: float) -> float:
    if not 0.0 <= q < 1.0:
        raise ModelError(f"bound requires q in [0, 1), got {q}")
    return math.exp(-((1.0 - 2.0 * q) ** 2) * n / 2.0)


def combined_failure_bound(phi: float, n: int, p: float, q: float, edge_count: int, m: int) -> float:
    return min(1.0, epsilon1(phi, n, p, edge_count, m) + epsilon2(n, q))
