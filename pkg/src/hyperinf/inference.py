"""Two-stage label recovery: stage-one solvers, KKT certifier, stage two.

Stage one maximizes <X, y^(x)m> over sign vectors, either exhaustively
(oracle) or through the factored relaxation Y = sum_k v_k^(x)m with
penalties enforcing the even-orbit equality and odd-orbit box constraints.
Stage two resolves the global sign with the noisy node labels.

Global-sign convention: m is even, so the stage-one objective cannot
distinguish y from -y; stage-one outputs are normalized to y[0] = +1.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .hypergraph import UniformHypergraph, make_graph
from .spectral import EigenConfig, EigenResult, degree_tensor, tensor_eig_min
from .tensors import IndexClass, SymmetricTensor, classify_index, orbit_size, rank_one

ORACLE_GUARDS = {2: 22, 6: 16}


class InferenceError(ValueError):
    pass


def stage_one_objective(x: SymmetricTensor, y) -> float:
    """The combinatorial objective <X, y^(x)m> for a sign vector y."""
    return x.form(y)


def _objective_terms(x: SymmetricTensor):
    """Reduce each orbit to (orbit-weighted value, odd-multiplicity vertices).

    On sign vectors the monomial of an orbit collapses to the product of y
    over its odd-multiplicity vertices.
    """
    terms = []
    for idx, value in sorted(x.entries.items()):
        counts = Counter(idx)
        odd = tuple(v for v, c in sorted(counts.items()) if c % 2 == 1)
        terms.append((value * orbit_size(idx), odd))
    return terms


def _candidate_signs(start: int, stop: int, n: int) -> np.ndarray:
    """Sign matrix for candidate ids in [start, stop); id 0 is all +1.

    The highest bit toggles y[1] and the lowest toggles y[n-1]; y[0] is
    pinned to +1.  Enumeration order therefore doubles as the
    lexicographic tie-break order (+1 sorts first).
    """
    ids = np.arange(start, stop, dtype=np.uint64)
    shifts = np.arange(n - 2, -1, -1, dtype=np.uint64)
    bits = (ids[:, None] >> shifts[None, :]) & np.uint64(1)
    y = np.ones((len(ids), n))
    y[:, 1:] = 1.0 - 2.0 * bits.astype(float)
    return y


@dataclass
class StageOneResult:
    y_hat: np.ndarray  # in {-1,+1}^n, normalized to y_hat[0] = +1
    objective: float
    method: str  # "oracle" or "relax"
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "y_hat": [int(v) for v in self.y_hat],
            "objective": self.objective,
            "method": self.method,
            "converged": self.converged,
        }


def stage1_oracle(x: SymmetricTensor, n: int | None = None, m: int | None = None) -> StageOneResult:
    """Exhaustive maximization over sign vectors modulo global flip."""
    n = x.n if n is None else n
    m = x.m if m is None else m
    guard = ORACLE_GUARDS[m]
    if n > guard:
        raise InferenceError(
            f"oracle enumeration refused for n={n} > {guard} (m={m}); "
            "use the relaxation solver instead"
        )
    terms = _objective_terms(x)
    best_obj = -math.inf
    best_id = 0
    total = 1 << (n - 1)
    chunk = 1 << 14
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        y = _candidate_signs(start, stop, n)
        obj = np.zeros(stop - start)
        for w, odd in terms:
            obj += w * (np.prod(y[:, list(odd)], axis=1) if odd else 1.0)
        i = int(np.argmax(obj))
        if obj[i] > best_obj:
            best_obj = float(obj[i])
            best_id = start + i
    y_hat = _candidate_signs(best_id, best_id + 1, n)[0]
    return StageOneResult(y_hat=y_hat, objective=best_obj, method="oracle", converged=True)


def _flip_sets(n: int):
    """Candidate vertex sets for sign-flip moves, up to size three.

    Pair and triple flips matter at even order: flipping an even number
    of vertices inside an edge leaves that edge's product unchanged, so
    single flips alone stall on spurious corners.
    """
    sets = [(i,) for i in range(n)]
    sets += list(itertools.combinations(range(n), 2))
    if n <= 16:
        sets += list(itertools.combinations(range(n), 3))
    return sets


def _local_search(terms, y):
    """Greedy hill climbing over bounded flip sets on the stage-one objective."""
    y = y.copy()
    n = len(y)
    incidence = np.zeros((len(terms), n), dtype=bool)
    weights = np.array([w for w, _ in terms])
    for t, (_, odd) in enumerate(terms):
        incidence[t, list(odd)] = True
    moves = _flip_sets(n)
    indicator = np.zeros((len(moves), n), dtype=np.float32)
    for j, s in enumerate(moves):
        indicator[j, list(s)] = 1.0
    # parity[j, t] = 1 when move j flips the sign of term t
    parity = (indicator @ incidence.T.astype(np.float32)) % 2.0
    while True:
        vals = weights * np.prod(np.where(incidence, y[None, :], 1.0), axis=1)
        deltas = -2.0 * (parity @ vals)
        best = int(np.argmax(deltas))
        if deltas[best] <= 1e-12:
            return y, True
        y[list(moves[best])] *= -1.0


def _is_local_max(terms, y) -> bool:
    probe, _ = _local_search(terms, y)
    return bool(np.array_equal(probe, y))


@dataclass
class RelaxConfig:
    factors: int = 1  # K rank-one factors; the target optimum is rank one
    restarts: int = 16
    max_iterations: int = 400
    tolerance: float = 1e-6  # gradient norm on the penalized objective
    even_weight: float | None = None  # defaults to m!
    odd_weight: float | None = None
    initial_step: float = 1e-2
    seed: int = 0


def _constraint_rows(n: int, m: int):
    """Canonical non-all-distinct multi-indices, split even / odd repeat."""
    even_rows, odd_rows = [], []
    for idx in itertools.combinations_with_replacement(range(n), m):
        cls = classify_index(idx, n, m)
        if cls is IndexClass.EVEN_REPEAT:
            even_rows.append(idx)
        elif cls is IndexClass.ODD_REPEAT:
            odd_rows.append(idx)
    to_arr = lambda rows: (
        np.ascontiguousarray(np.array(rows, dtype=np.int64))
        if rows
        else np.zeros((0, m), dtype=np.int64)
    )
    return to_arr(even_rows), to_arr(odd_rows)


def stage1_relax(x: SymmetricTensor, n=None, m=None, config: RelaxConfig | None = None) -> StageOneResult:
    """Penalized gradient ascent on the factored relaxation, then rounding.

    Each restart runs projected-free gradient ascent with Armijo line
    search, rounds the dominant factor to signs, and hill-climbs over
    bounded flip sets to a local maximum of the combinatorial objective.
    converged reports whether the *rounded* point was already a local
    maximum.
    """
    n = x.n if n is None else n
    m = x.m if m is None else m
    if config is None:
        config = RelaxConfig()
    w_even = float(math.factorial(m)) if config.even_weight is None else config.even_weight
    w_odd = float(math.factorial(m)) if config.odd_weight is None else config.odd_weight
    even_idx, odd_idx = _constraint_rows(n, m)
    obj_idx, _, obj_w = x._rows()
    obj_w = np.ascontiguousarray(obj_w)
    terms = _objective_terms(x)
    k = config.factors

    def orbit_values(vs, idx):
        out = np.zeros(idx.shape[0])
        for v in vs:
            out += _kernels.row_products(idx, v)
        return out

    def penalized(vs):
        value = sum(float(np.dot(obj_w, _kernels.row_products(obj_idx, v))) for v in vs)
        y_even = orbit_values(vs, even_idx)
        y_odd = orbit_values(vs, odd_idx)
        value -= w_even * float(np.sum((y_even - 1.0) ** 2))
        value -= w_odd * float(np.sum(np.maximum(np.abs(y_odd) - 1.0, 0.0) ** 2))
        return value

    def gradients(vs):
        y_even = orbit_values(vs, even_idx)
        y_odd = orbit_values(vs, odd_idx)
        d_even = np.ascontiguousarray(-2.0 * w_even * (y_even - 1.0))
        hinge = np.maximum(np.abs(y_odd) - 1.0, 0.0)
        d_odd = np.ascontiguousarray(-2.0 * w_odd * np.sign(y_odd) * hinge)
        grads = []
        for v in vs:
            g = _kernels.row_grad_accumulate(obj_idx, obj_w, v)
            g += _kernels.row_grad_accumulate(even_idx, d_even, v)
            g += _kernels.row_grad_accumulate(odd_idx, d_odd, v)
            grads.append(g)
        return grads

    ss = np.random.SeedSequence(config.seed)
    best = None
    for r, child in enumerate(ss.spawn(config.restarts)):
        rng = np.random.Generator(np.random.PCG64(child))
        vs = [rng.standard_normal(n) for _ in range(k)]
        vs = [v * math.sqrt(n) / np.linalg.norm(v) for v in vs]
        fv = penalized(vs)
        step = config.initial_step
        for _ in range(config.max_iterations):
            grads = gradients(vs)
            gnorm = math.sqrt(sum(float(np.dot(g, g)) for g in grads))
            if gnorm <= config.tolerance:
                break
            improved = False
            while step > 1e-16:
                cand = [v + step * g for v, g in zip(vs, grads)]
                fc = penalized(cand)
                if fc >= fv + 1e-4 * step * gnorm**2:
                    vs, fv = cand, fc
                    step *= 2.0
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
        dominant = max(vs, key=lambda v: float(np.linalg.norm(v)))
        y_rounded = np.where(dominant >= 0.0, 1.0, -1.0)
        was_fixed = _is_local_max(terms, y_rounded)
        y_hat, _ = _local_search(terms, y_rounded)
        objective = stage_one_objective(x, y_hat)
        candidate = (objective, -r, y_hat, was_fixed)
        if best is None or candidate[:2] > best[:2]:
            best = candidate
    objective, _, y_hat, was_fixed = best
    if y_hat[0] < 0:
        y_hat = -y_hat
    return StageOneResult(
        y_hat=y_hat, objective=float(objective), method="relax", converged=was_fixed
    )


# ---------------------------------------------------------------------------
# KKT certification


@dataclass
class CertifyTolerances:
    stationarity: float = 1e-8
    slackness: float = 1e-8
    duality_gap_rel: float = 1e-7
    lambda2_margin: float = 1e-6  # strict positivity margin (uniqueness)
    lambda2_strict: bool = True  # False: only require lambda2 >= -stationarity
    eigen: EigenConfig = field(default_factory=EigenConfig)


@dataclass
class Certificate:
    v_dual: SymmetricTensor  # dual variable on repeat-index orbits (= D_y)
    a_dual: SymmetricTensor  # A = D_y - X
    stationarity_residual: float
    primal_residual: float
    complementary_slackness_residual: float
    duality_gap: float
    a_inner_y: float
    lambda2_of_a: EigenResult
    certified: bool

    def to_json_dict(self) -> dict:
        return {
            "stationarity_residual": self.stationarity_residual,
            "primal_residual": self.primal_residual,
            "complementary_slackness_residual": self.complementary_slackness_residual,
            "duality_gap": self.duality_gap,
            "a_inner_y": self.a_inner_y,
            "lambda2_of_a": self.lambda2_of_a.to_json_dict(),
            "certified": self.certified,
        }


def graph_from_support(x: SymmetricTensor) -> UniformHypergraph:
    """Recover the edge set from the nonzero all-distinct orbits of X."""
    edges = [
        idx
        for idx, _ in x.entries.items()
        if classify_index(idx, x.n, x.m) is IndexClass.ALL_DISTINCT
    ]
    return make_graph(x.n, x.m, edges)


def kkt_certify(x: SymmetricTensor, y_candidate, tolerances: CertifyTolerances | None = None) -> Certificate:
    """Build the dual construction (V = D_y, A = D_y - X) and check KKT.

    The degree tensor is built from the observed edge signs relative to the
    candidate labeling, so stationarity V - X - A = 0 holds by
    construction; feasibility, slackness, the duality gap, and the
    restart-based lambda2 check are measured and reported.  certified is a
    numerically-supported claim, not a proof: the lambda2 leg relies on the
    nonconvex eigen solver's best-over-restarts bound.
    """
    if tolerances is None:
        tolerances = CertifyTolerances()
    y = np.asarray(y_candidate, dtype=float)
    if y.shape != (x.n,) or not np.all(np.abs(y) == 1.0):
        raise InferenceError("candidate must be a length-n vector of +/-1")
    graph = graph_from_support(x)
    weights = np.array(
        [x.get(e) * np.prod(y[list(e)]) for e in graph.edges], dtype=float
    )
    d = degree_tensor(graph, y, edge_weights=weights)
    a = d.subtract(x)

    # Stationarity: V (= D on repeat orbits, 0 elsewhere) - X - A over all orbits.
    keys = set(d.entries) | set(x.entries) | set(a.entries)
    stationarity = max(
        (abs(d.get(kk) - x.get(kk) - a.get(kk)) for kk in keys), default=0.0
    )

    y_rank_one = rank_one(y, x.m)
    primal_residual = 0.0
    slackness = 0.0
    dual_obj = 0.0
    for idx, value in d.entries.items():
        cls = classify_index(idx, x.n, x.m)
        y_entry = y_rank_one.get(idx)
        size = orbit_size(idx)
        if cls is IndexClass.EVEN_REPEAT:
            primal_residual = max(primal_residual, abs(y_entry - 1.0))
            dual_obj += size * value
        elif cls is IndexClass.ODD_REPEAT:
            primal_residual = max(primal_residual, max(abs(y_entry) - 1.0, 0.0))
            v_plus, v_minus = max(value, 0.0), -min(value, 0.0)
            slackness = max(
                slackness,
                abs(v_plus * (y_entry - 1.0)),
                abs(v_minus * (y_entry + 1.0)),
            )
            dual_obj += size * (v_plus + v_minus)
        else:  # degree tensors vanish on all-distinct indices
            stationarity = max(stationarity, abs(value))

    primal_obj = x.inner_product(y_rank_one)
    gap = (dual_obj - primal_obj) / max(1.0, abs(primal_obj))
    a_inner_y = a.form(y)

    lambda2 = tensor_eig_min(
        a.form, a.form_gradient, x.n, x.m, constraints=[y], config=tolerances.eigen
    )
    if tolerances.lambda2_strict:
        lambda2_ok = lambda2.value > tolerances.lambda2_margin
    else:
        lambda2_ok = lambda2.value >= -tolerances.stationarity
    certified = (
        stationarity <= tolerances.stationarity
        and primal_residual <= tolerances.stationarity
        and slackness <= tolerances.slackness
        and abs(gap) <= tolerances.duality_gap_rel
        and abs(a_inner_y) <= tolerances.stationarity * max(1.0, abs(primal_obj))
        and lambda2_ok
    )
    return Certificate(
        v_dual=d,
        a_dual=a,
        stationarity_residual=stationarity,
        primal_residual=primal_residual,
        complementary_slackness_residual=slackness,
        duality_gap=gap,
        a_inner_y=a_inner_y,
        lambda2_of_a=lambda2,
        certified=certified,
    )


# ---------------------------------------------------------------------------
# Stage two and the pipeline


def stage2_disambiguate(y_hat, z) -> np.ndarray:
    """Pick the global sign agreeing with the node observation.

    Ties (z . y_hat == 0, possible only for even n) resolve to +y_hat.
    """
    y_hat = np.asarray(y_hat, dtype=float)
    z = np.asarray(z, dtype=float)
    if y_hat.shape != z.shape:
        raise InferenceError(f"length mismatch: {y_hat.shape} vs {z.shape}")
    return y_hat if float(np.dot(z, y_hat)) >= 0.0 else -y_hat


@dataclass
class RecoveryResult:
    y_recovered: np.ndarray
    stage1: StageOneResult
    certificate: Certificate | None
    stage2_margin: float
    exact: bool | None  # None when no ground truth was supplied

    def to_json_dict(self) -> dict:
        return {
            "y_recovered": [int(v) for v in self.y_recovered],
            "stage1": self.stage1.to_json_dict(),
            "certificate": self.certificate.to_json_dict() if self.certificate else None,
            "stage2_margin": self.stage2_margin,
            "exact": self.exact,
        }


def run_pipeline(
    observation,
    method: str = "oracle",
    relax_config: RelaxConfig | None = None,
    certify: bool = False,
    tolerances: CertifyTolerances | None = None,
    ground_truth=None,
) -> RecoveryResult:
    if method == "oracle":
        stage1 = stage1_oracle(observation.x)
    elif method == "relax":
        stage1 = stage1_relax(observation.x, config=relax_config)
    else:
        raise InferenceError(f"unknown stage-one method {method!r}")
    if stage1.y_hat[0] < 0:
        stage1.y_hat = -stage1.y_hat
    certificate = kkt_certify(observation.x, stage1.y_hat, tolerances) if certify else None
    y_recovered = stage2_disambiguate(stage1.y_hat, observation.z)
    exact = None
    if ground_truth is not None:
        exact = bool(np.array_equal(y_recovered, np.asarray(ground_truth, dtype=float)))
    return RecoveryResult(
        y_recovered=y_recovered,
        stage1=stage1,
        certificate=certificate,
        stage2_margin=float(np.dot(observation.z, y_recovered)),
        exact=exact,
    )
