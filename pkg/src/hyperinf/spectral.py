"""Hypergraph Laplacian forms, degree tensors, and tensor eigenvalues.

The Laplacian is never materialized: its outer-power form over a vector v is
(1 / C(m, m/2)) * sum over unordered edges of the zeta edge energy, where

    zeta(w_1, ..., w_m) = sum over half-subsets I of (sum_I w - sum_notI w)^m.

The 1/C(m, m/2) prefactor makes the m=2 case coincide with the classical
graph Laplacian quadratic form sum_{(i,j) in E} (v_i - v_j)^2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .hypergraph import (
    EXACT_CHEEGER_GUARD,
    BoundarySemantics,
    UniformHypergraph,
    cheeger_exact,
    cheeger_sweep,
)
from .tensors import SymmetricTensor, check_order, orbit_size


@lru_cache(maxsize=None)
def half_sign_patterns(m: int) -> np.ndarray:
    """All C(m, m/2) sign rows with +1 on a half-subset and -1 elsewhere."""
    check_order(m)
    rows = []
    for subset in itertools.combinations(range(m), m // 2):
        row = -np.ones(m)
        row[list(subset)] = 1.0
        rows.append(row)
    return np.ascontiguousarray(np.array(rows))


def zeta(*args) -> float:
    m = len(args)
    check_order(m)
    w = np.ascontiguousarray(np.array(args, dtype=float)[None, :])
    return float(_kernels.zeta_edge_values(w, half_sign_patterns(m), m)[0])


class LaplacianOperator:
    """Implicit (signed) Laplacian: evaluates forms and gradients edge-wise.

    The unsigned Laplacian is the special case y = all-ones.
    """

    def __init__(self, graph: UniformHypergraph, y=None):
        self.graph = graph
        self.n = graph.n
        self.m = graph.m
        if y is None:
            y = np.ones(graph.n)
        y = np.asarray(y, dtype=float)
        if y.shape != (graph.n,) or not np.all(np.abs(y) == 1.0):
            raise ValueError("sign vector must be a length-n vector of +/-1")
        self.y = y
        self._edges = graph.edge_array()
        self._edge_signs = y[self._edges] if len(graph.edges) else np.zeros((0, graph.m))
        self._prefactor = 1.0 / math.comb(self.m, self.m // 2)
        self._patterns = half_sign_patterns(self.m)

    def _signed_entries(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise ValueError(f"vector shape {v.shape} != ({self.n},)")
        return np.ascontiguousarray(self._edge_signs * v[self._edges])

    def form(self, v) -> float:
        if not self.graph.edges:
            return 0.0
        w = self._signed_entries(v)
        vals = _kernels.zeta_edge_values(w, self._patterns, self.m)
        return self._prefactor * float(np.sum(vals))

    def gradient(self, v) -> np.ndarray:
        out = np.zeros(self.n)
        if not self.graph.edges:
            return out
        w = self._signed_entries(v)
        g = _kernels.zeta_edge_grad(w, self._patterns, self.m)  # (E, m), d/dw
        g = g * self._edge_signs  # chain rule through w = y*v
        for t in range(self.m):
            np.add.at(out, self._edges[:, t], g[:, t])
        return self._prefactor * out


def laplacian_form(op: LaplacianOperator, v) -> float:
    return op.form(v)


def rayleigh(op: LaplacianOperator, v) -> float:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("Rayleigh quotient undefined for the zero vector")
    return op.form(v) / norm**op.m


def adjacency_tensor(graph: UniformHypergraph) -> SymmetricTensor:
    out = SymmetricTensor(graph.m, graph.n)
    for e in graph.edges:
        out.set(e, 1.0)
    return out


def signed_adjacency(graph: UniformHypergraph, y) -> SymmetricTensor:
    """Clean observation tensor: entry prod(y over edge) on every edge orbit."""
    y = np.asarray(y, dtype=float)
    out = SymmetricTensor(graph.m, graph.n)
    for e in graph.edges:
        out.set(e, float(np.prod(y[list(e)])))
    return out


@lru_cache(maxsize=None)
def zeta_expansion_table(m: int):
    """Monomial expansion of zeta / C(m, m/2) over edge positions.

    Returns tuples (exponents, coefficient) where exponents assigns a power
    to each of the m edge positions (summing to m).  The coefficient of a
    monomial depends on the multinomial weight and on the number of odd
    exponents; zero coefficients are dropped.
    """
    check_order(m)
    half = m // 2
    total_patterns = math.comb(m, half)
    # sign_sum[o] = sum over half-subset sign rows of the product of signs
    # at o fixed positions.
    sign_sum = {}
    for o in range(0, m + 1, 2):
        s = 0
        for j in range(max(0, half - (m - o)), min(o, half) + 1):
            s += (-1) ** j * math.comb(o, j) * math.comb(m - o, half - j)
        sign_sum[o] = s
    table = []
    for exponents in _compositions(m, m):
        odd = sum(1 for d in exponents if d % 2 == 1)
        s = sign_sum[odd]
        if s == 0:
            continue
        multinomial = math.factorial(m)
        for d in exponents:
            multinomial //= math.factorial(d)
        coeff = multinomial * s / total_patterns
        table.append((exponents, coeff))
    return tuple(table)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def degree_tensor(graph: UniformHypergraph, y, edge_weights=None) -> SymmetricTensor:
    """High-order degree tensor D_y of the signed Laplacian.

    Satisfies <D_y - W, v^(x)m> = sum_e w_e * zeta(y*v on e) / C(m, m/2)
    where W is the edge tensor with orbit value w_e * prod(y over e)
    (w_e = 1 reproduces the clean signed adjacency identity).  D_y is zero
    on every all-distinct multi-index by construction.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (graph.n,) or not np.all(np.abs(y) == 1.0):
        raise ValueError("sign vector must be a length-n vector of +/-1")
    if edge_weights is None:
        edge_weights = np.ones(len(graph.edges))
    edge_weights = np.asarray(edge_weights, dtype=float)
    m = graph.m
    all_ones = tuple([1] * m)
    poly: dict[tuple, float] = {}
    for e, w_e in zip(graph.edges, edge_weights):
        for exponents, coeff in zeta_expansion_table(m):
            if exponents == all_ones:
                continue  # cancelled by the adjacency part of the identity
            idx = []
            sign = 1.0
            for vertex, d in zip(e, exponents):
                idx.extend([vertex] * d)
                if d % 2 == 1 and y[vertex] < 0:
                    sign = -sign
            key = tuple(sorted(idx))
            poly[key] = poly.get(key, 0.0) + w_e * coeff * sign
    out = SymmetricTensor(m, graph.n)
    for key, value in poly.items():
        out.set(key, value / orbit_size(key))
    return out


# ---------------------------------------------------------------------------
# Variational tensor eigenvalues


@dataclass
class EigenConfig:
    restarts: int = 32
    max_iterations: int = 5000
    tolerance: float = 1e-8  # projected-gradient norm
    initial_step: float = 1.0
    armijo_factor: float = 0.5
    armijo_slope: float = 1e-4
    seed: int = 0


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    restarts_used: int
    residual: float
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "vector": [float(x) for x in self.vector],
            "restarts_used": self.restarts_used,
            "residual": self.residual,
            "converged": self.converged,
        }


def _orthonormalize(vectors, n):
    basis = []
    for c in vectors:
        c = np.asarray(c, dtype=float).copy()
        for b in basis:
            c -= np.dot(b, c) * b
        norm = np.linalg.norm(c)
        if norm > 1e-12:
            basis.append(c / norm)
    return basis


def tensor_eig_min(form, gradient, n, m, constraints=(), config: EigenConfig | None = None) -> EigenResult:
    """Minimize <T, v^(x)m> over the unit sphere, orthogonal to constraints.

    Projected gradient descent with Armijo backtracking; best result over
    seeded restarts (deterministic reduction: min value, then lowest
    restart index).  For nonconvex orders (m=6) the result is a certified
    upper bound on the constrained minimum, not a global certificate.
    """
    if config is None:
        config = EigenConfig()
    basis = _orthonormalize(constraints, n)

    def project(x):
        for b in basis:
            x = x - np.dot(b, x) * b
        return x

    ss = np.random.SeedSequence(config.seed)
    children = ss.spawn(config.restarts)

    best = None
    for r, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        v = project(rng.standard_normal(n))
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            continue
        v = v / norm
        step = config.initial_step
        fv = form(v)
        converged = False
        residual = math.inf
        for _ in range(config.max_iterations):
            g = project(gradient(v))
            g = g - np.dot(g, v) * v  # tangent to the sphere
            residual = float(np.linalg.norm(g))
            if residual <= config.tolerance:
                converged = True
                break
            improved = False
            while step > 1e-18:
                cand = project(v - step * g)
                norm = np.linalg.norm(cand)
                if norm > 1e-12:
                    cand = cand / norm
                    fc = form(cand)
                    if fc <= fv - config.armijo_slope * step * residual**2:
                        v, fv = cand, fc
                        improved = True
                        step *= 2.0
                        break
                step *= config.armijo_factor
            if not improved:
                break
        candidate = EigenResult(
            value=float(fv),
            vector=v,
            restarts_used=r + 1,
            residual=residual,
            converged=converged,
        )
        if best is None or candidate.value < best.value:
            best = candidate
    if best is None:
        raise ValueError("all restarts degenerated; constraints span the space?")
    best.restarts_used = config.restarts
    return best


def laplacian_eig_min(op: LaplacianOperator, constraints=(), config=None) -> EigenResult:
    return tensor_eig_min(op.form, op.gradient, op.n, op.m, constraints, config)


def laplacian_lambda2(op: LaplacianOperator, config=None) -> EigenResult:
    """Second minimum eigenvalue, orthogonal to the known zero eigenvector y."""
    return laplacian_eig_min(op, constraints=[op.y], config=config)


# ---------------------------------------------------------------------------
# Cheeger audit


@dataclass
class CheegerAudit:
    lambda2: float
    phi: float
    phi_pow_m: float
    satisfied: bool
    semantics: BoundarySemantics
    phi_is_exact: bool
    ratio: float | None = None
    eigen: EigenResult | None = None

    def to_json_dict(self) -> dict:
        return {
            "lambda2": self.lambda2,
            "phi": self.phi,
            "phi_pow_m": self.phi_pow_m,
            "satisfied": self.satisfied,
            "semantics": self.semantics.value,
            "phi_is_exact": self.phi_is_exact,
            "ratio": self.ratio,
            "eigen": self.eigen.to_json_dict() if self.eigen else None,
        }


def cheeger_audit(
    graph: UniformHypergraph,
    semantics=BoundarySemantics.EDGE_SET,
    config: EigenConfig | None = None,
) -> CheegerAudit:
    """Report lambda2 versus phi^m.  This is a report, not an assertion:
    the inequality lambda2 >= phi^m fails on e.g. the m=2 triangle under
    every normalization consistent with the classical reduction, so the
    audit records the ratio instead of enforcing it.
    """
    op = LaplacianOperator(graph)
    eig = laplacian_lambda2(op, config=config)
    big_n = math.comb(graph.n, graph.m // 2)
    if big_n <= EXACT_CHEEGER_GUARD:
        phi, _ = cheeger_exact(graph, semantics)
        exact = True
    else:
        phi = cheeger_sweep(graph, eig.vector, semantics).expansion
        exact = False
    phi_pow_m = phi**graph.m
    return CheegerAudit(
        lambda2=eig.value,
        phi=phi,
        phi_pow_m=phi_pow_m,
        satisfied=eig.value >= phi_pow_m,
        semantics=semantics,
        phi_is_exact=exact,
        ratio=(eig.value / phi_pow_m) if phi_pow_m > 0 else None,
        eigen=eig,
    )
