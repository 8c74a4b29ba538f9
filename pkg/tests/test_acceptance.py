"""Acceptance gate: one test per criterion, one pass/fail line each.

Criterion 5's order-six certification leg is asserted at face value.  The
dual construction V = D_y, A = D_y - X cannot close the duality gap or
satisfy complementary slackness at order six, because the degree tensor
carries negative odd-repeat orbit entries on every tested family; the
assertion is kept strict rather than weakened, so that test documents the
defect by failing.  Order two certifies cleanly.
"""
import itertools
import math
import time

import numpy as np
import pytest

from hyperinf.hypergraph import (
    cheeger_exact,
    complete,
    erdos_renyi,
    two_blocks_bridged,
)
from hyperinf.inference import (
    CertifyTolerances,
    RelaxConfig,
    stage_one_objective,
    kkt_certify,
    run_pipeline,
    stage1_oracle,
    stage2_disambiguate,
)
from hyperinf.model import combined_failure_bound, epsilon1, epsilon2, sample_observation
from hyperinf.spectral import (
    EigenConfig,
    LaplacianOperator,
    cheeger_audit,
    degree_tensor,
    laplacian_form,
    rayleigh,
    signed_adjacency,
)
from hyperinf.tensors import IndexClass, classify_index

CERT = CertifyTolerances(eigen=EigenConfig(restarts=4, max_iterations=1200))


def report(number, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {number:02d}] {status}: {detail}")
    return ok


def random_sign(rng, n):
    return rng.choice([-1.0, 1.0], size=n)


def classical_laplacian(g):
    L = np.zeros((g.n, g.n))
    for i, j in g.edges:
        L[i, i] += 1.0
        L[j, j] += 1.0
        L[i, j] -= 1.0
        L[j, i] -= 1.0
    return L


def test_criterion_01_classical_reduction():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for trial in range(100):
        n = int(rng.integers(4, 13))
        g = erdos_renyi(n, 2, 0.5, seed=trial)
        op = LaplacianOperator(g)
        L = classical_laplacian(g)
        v = rng.standard_normal(n)
        got = laplacian_form(op, v)
        want = float(v @ L @ v)
        scale = max(1.0, abs(want))
        worst = max(worst, abs(got - want) / scale)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    assert report(1, ok, f"m=2 reduction on 100 graphs, worst rel err {worst:.2e}, {elapsed:.1f}s")


def invariant_graphs(m):
    if m == 2:
        return [erdos_renyi(8, 2, 0.6, seed=s) for s in range(3) if erdos_renyi(8, 2, 0.6, seed=s).edges]
    return [complete(8, 6), two_blocks_bridged(12, 6, 2, seed=0)]


def test_criterion_02_invariant_suite():
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    violations = {"zero": 0.0, "scale": 0.0, "shift": 0.0, "signed": 0.0}
    for m in (2, 6):
        graphs = invariant_graphs(m)
        for _ in range(1000):
            g = graphs[int(rng.integers(len(graphs)))]
            y = random_sign(rng, g.n)
            signed_op = LaplacianOperator(g, y)
            unsigned_op = LaplacianOperator(g)
            ones = np.ones(g.n)

            # zero eigenpair: the sign vector is an exact null vector
            violations["zero"] = max(violations["zero"], abs(signed_op.form(y)))

            # scale invariance of the Rayleigh quotient
            v = rng.standard_normal(g.n)
            alpha = float(rng.uniform(0.1, 3.0)) * float(rng.choice([-1.0, 1.0]))
            base = rayleigh(signed_op, v)
            violations["scale"] = max(
                violations["scale"],
                abs(rayleigh(signed_op, alpha * v) - base) / max(1.0, abs(base)),
            )

            # shift inequality for v orthogonal to the all-ones vector
            u = rng.standard_normal(g.n)
            u -= np.dot(u, ones) / g.n * ones
            delta = float(rng.standard_normal())
            violations["shift"] = max(
                violations["shift"],
                rayleigh(unsigned_op, u + delta * ones) - rayleigh(unsigned_op, u),
            )

            # signed lower bound for v orthogonal to y
            w = rng.standard_normal(g.n)
            w -= np.dot(w, y) / g.n * y
            violations["signed"] = max(
                violations["signed"],
                rayleigh(unsigned_op, y * w + delta * ones) - rayleigh(signed_op, w),
            )
    elapsed = time.perf_counter() - start
    ok = (
        violations["zero"] <= 1e-12
        and violations["scale"] <= 1e-12
        and violations["shift"] <= 1e-10
        and violations["signed"] <= 1e-10
        and elapsed < 30.0
    )
    detail = ", ".join(f"{k} {v:.2e}" for k, v in violations.items())
    assert report(2, ok, f"invariant suite worst slacks: {detail}, {elapsed:.1f}s")


def test_criterion_03_degree_tensor_identity():
    rng = np.random.default_rng(103)
    start = time.perf_counter()
    worst = 0.0
    distinct_ok = True
    for trial in range(50):
        m = 2 if trial % 2 == 0 else 6
        if m == 2:
            g = erdos_renyi(8, 2, 0.6, seed=trial)
            if not g.edges:
                g = complete(8, 2)
        else:
            g = complete(8, 6) if trial % 4 == 1 else two_blocks_bridged(12, 6, 2, seed=trial)
        y = random_sign(rng, g.n)
        v = rng.standard_normal(g.n)
        d = degree_tensor(g, y)
        x = signed_adjacency(g, y)
        op = LaplacianOperator(g, y)
        want = op.form(v)
        got = d.form(v) - x.form(v)
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
        for idx in d.entries:
            if classify_index(idx, g.n, g.m) is IndexClass.ALL_DISTINCT:
                distinct_ok = False
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and distinct_ok and elapsed < 30.0
    assert report(
        3,
        ok,
        f"degree identity worst rel err {worst:.2e}, all-distinct zero: {distinct_ok}, {elapsed:.1f}s",
    )


def naive_enumeration(x, n):
    best_obj, best_y = -np.inf, None
    for bits in itertools.product([1.0, -1.0], repeat=n - 1):
        y = np.array((1.0,) + bits)
        obj = stage_one_objective(x, y)
        if obj > best_obj:
            best_obj, best_y = obj, y
    return best_y, best_obj


def test_criterion_04_oracle_correctness():
    rng = np.random.default_rng(104)
    start = time.perf_counter()
    mismatches = 0
    for trial in range(50):
        n = 7 if trial % 2 == 0 else 8
        g = complete(n, 6) if trial % 3 else erdos_renyi(n, 6, 0.7, seed=trial)
        if not g.edges:
            g = complete(n, 6)
        y_star = random_sign(rng, n)
        obs = sample_observation(g, y_star, float(rng.uniform(0.0, 0.45)), 0.0, seed=trial)
        res = stage1_oracle(obs.x)
        want_y, want_obj = naive_enumeration(obs.x, n)
        if not np.array_equal(res.y_hat, want_y) or abs(res.objective - want_obj) > 1e-9:
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60.0
    assert report(4, ok, f"oracle vs naive enumeration, {mismatches}/50 mismatches, {elapsed:.1f}s")


def test_criterion_05_clean_recovery_and_certification():
    rng = np.random.default_rng(105)
    start = time.perf_counter()
    families = {
        "complete(8,6)": complete(8, 6),
        "two_blocks_bridged(14,6,4)": two_blocks_bridged(14, 6, 4, seed=0),
    }
    recovery_ok = True
    for name, g in families.items():
        for trial in range(20):
            y_star = random_sign(rng, g.n)
            obs = sample_observation(g, y_star, 0.0, 0.0, seed=trial)
            for method in ("oracle", "relax"):
                result = run_pipeline(
                    obs,
                    method=method,
                    relax_config=RelaxConfig(restarts=16, max_iterations=200, seed=trial),
                    ground_truth=y_star,
                )
                if not result.exact:
                    recovery_ok = False

    gaps = {}
    certified = {}
    for name, g in families.items():
        y_star = random_sign(rng, g.n)
        obs = sample_observation(g, y_star, 0.0, 0.0, seed=99)
        cert = kkt_certify(obs.x, y_star, CERT)
        gaps[name] = cert.duality_gap
        certified[name] = cert.certified
    elapsed = time.perf_counter() - start
    cert_ok = all(certified.values()) and all(abs(gap) <= 1e-7 for gap in gaps.values())
    gap_text = ", ".join(f"{k}: gap {v:.3e} certified {certified[k]}" for k, v in gaps.items())
    ok = recovery_ok and cert_ok and elapsed < 120.0
    assert report(
        5,
        ok,
        f"clean recovery 20/20 both methods: {recovery_ok}; certification: {gap_text}; {elapsed:.1f}s",
    )


def test_criterion_06_certifier_soundness():
    rng = np.random.default_rng(106)
    start = time.perf_counter()
    unsound = 0
    certified_count = 0
    for trial in range(50):
        m = 2 if trial % 2 == 0 else 6
        g = complete(8, m)
        y_star = random_sign(rng, 8)
        p = float(rng.choice([0.0, 0.1, 0.2, 0.3]))
        obs = sample_observation(g, y_star, p, 0.0, seed=trial)
        oracle = stage1_oracle(obs.x)
        flipped = oracle.y_hat.copy()
        flipped[int(rng.integers(8))] *= -1.0
        for candidate in (oracle.y_hat, flipped):
            cert = kkt_certify(obs.x, candidate, CERT)
            if cert.certified:
                certified_count += 1
                if abs(stage_one_objective(obs.x, candidate) - oracle.objective) > 1e-9:
                    unsound += 1
    elapsed = time.perf_counter() - start
    ok = unsound == 0 and elapsed < 120.0
    assert report(
        6,
        ok,
        f"certified => oracle-optimal, {unsound} violations over {certified_count} certificates, {elapsed:.1f}s",
    )


def test_criterion_07_noise_trend():
    rng = np.random.default_rng(107)
    start = time.perf_counter()
    g = complete(10, 6)
    p_grid = [0.0, 0.1, 0.2, 0.3, 0.4]
    rates = []
    for cell, p in enumerate(p_grid):
        hits = 0
        for trial in range(20):
            y_star = random_sign(rng, 10)
            obs = sample_observation(g, y_star, p, 0.0, seed=1000 * cell + trial)
            result = run_pipeline(
                obs,
                method="relax",
                relax_config=RelaxConfig(restarts=8, seed=trial),
                ground_truth=y_star,
            )
            if np.array_equal(result.stage1.y_hat, y_star) or np.array_equal(
                result.stage1.y_hat, -y_star
            ):
                hits += 1
        rates.append(hits / 20.0)
    elapsed = time.perf_counter() - start
    inversions = [
        rates[i + 1] - rates[i] for i in range(len(rates) - 1) if rates[i + 1] > rates[i]
    ]
    ok = (
        rates[0] == 1.0
        and len(inversions) <= 1
        and all(v <= 0.05 + 1e-12 for v in inversions)
        and elapsed < 600.0
    )
    assert report(7, ok, f"n=10 recovery rates over p {p_grid}: {rates}, {elapsed:.1f}s")


def test_criterion_08_stage_two_bound():
    rng = np.random.default_rng(108)
    start = time.perf_counter()
    n, q, trials = 50, 0.25, 100_000
    y_star = np.ones(n)
    flips = rng.uniform(size=(trials, n)) < q
    z = np.where(flips, -1.0, 1.0)
    # the pipeline hands stage two the correct labeling up to global sign
    failures = int(np.sum(z.sum(axis=1) < 0.0))
    # spot-check the vectorized count against the real function
    for row in z[:200]:
        got = stage2_disambiguate(y_star, row)
        assert np.array_equal(got, y_star) == (float(row.sum()) >= 0.0)
    rate = failures / trials
    bound = epsilon2(n, q)
    sigma = math.sqrt(bound * (1.0 - bound) / trials)
    elapsed = time.perf_counter() - start
    ok = rate <= bound + 3.0 * sigma and elapsed < 30.0
    assert report(
        8, ok, f"stage-two MC rate {rate:.2e} <= eps2 {bound:.2e} + 3 sigma, {elapsed:.1f}s"
    )


def test_criterion_09_cheeger_audit_report():
    start = time.perf_counter()
    config = EigenConfig(restarts=8, max_iterations=2000)

    disconnected = {
        "two_blocks(12,2,0)": two_blocks_bridged(12, 2, 0, seed=0),
        "two_blocks(12,6,0)": two_blocks_bridged(12, 6, 0, seed=0),
    }
    zero_ok = True
    for g in disconnected.values():
        audit = cheeger_audit(g, config=config)
        if abs(audit.lambda2) > 1e-8 or abs(audit.phi) > 1e-8:
            zero_ok = False

    triangle = cheeger_audit(complete(3, 2), config=config)
    triangle_ok = (
        abs(triangle.lambda2 - 3.0) <= 1e-6
        and triangle.phi == 2.0
        and triangle.satisfied is False
    )
    elapsed = time.perf_counter() - start
    ok = zero_ok and triangle_ok and elapsed < 10.0
    assert report(
        9,
        ok,
        f"disconnected lambda2=phi=0: {zero_ok}; triangle lambda2 {triangle.lambda2:.6f}, "
        f"phi {triangle.phi}, satisfied {triangle.satisfied}; {elapsed:.1f}s",
    )


def eps1_ref(phi, n, p, edges, m):
    gap = (1.0 - 2.0 * p) ** 2 * math.pow(phi, 2 * m)
    denom = 8.0 * math.pow(n, m) * max(edges, math.pow(n, m - 1))
    return 2.0 * math.pow(n, m) * math.exp(-gap / denom) + 16.0 * (1.0 - p) * edges / gap


def eps2_ref(n, q):
    return math.exp(-n * (1.0 - 2.0 * q) ** 2 / 2.0)


def test_criterion_10_bound_calculators():
    grid = [
        (phi, n, p, q, edges, m)
        for m, phi, edges in ((2, 1.5, 28), (2, 3.0, 66), (6, 10.0, 28), (6, 35.0, 210))
        for n, p, q in ((8, 0.05, 0.1), (12, 0.1, 0.2), (20, 0.2, 0.05), (40, 0.3, 0.25), (64, 0.4, 0.4))
    ]
    assert len(grid) == 20
    worst = 0.0
    for phi, n, p, q, edges, m in grid:
        a = epsilon1(phi, n, p, edges, m)
        b = eps1_ref(phi, n, p, edges, m)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
        a2, b2 = epsilon2(n, q), eps2_ref(n, q)
        worst = max(worst, abs(a2 - b2) / max(1.0, abs(b2)))
        comb = combined_failure_bound(phi, n, p, q, edges, m)
        worst = max(worst, abs(comb - min(1.0, b + b2)) / max(1.0, abs(min(1.0, b + b2))))

    # complete-hypergraph decay: the combined bound falls at least like 1/n
    ns = list(range(8, 65, 8))
    values = []
    for n in ns:
        phi = math.comb(n - 3, 3)  # single-hypervertex cut expansion
        edges = math.comb(n, 6)
        values.append(combined_failure_bound(phi, n, 0.1, 0.1, edges, 6))
    monotone = all(values[i + 1] <= values[i] + 1e-15 for i in range(len(values) - 1))
    decay = all(n * v <= ns[0] * values[0] + 1e-12 for n, v in zip(ns, values))
    ok = worst <= 1e-12 and monotone and decay
    assert report(
        10,
        ok,
        f"bound re-implementation worst rel err {worst:.2e}; decay n*bound "
        f"{[round(n * v, 4) for n, v in zip(ns, values)]}",
    )
