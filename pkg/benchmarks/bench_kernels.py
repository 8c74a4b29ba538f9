"""Benchmark the compiled kernels against the pure NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--n N] [--m {2,6}] [--repeat R]

Times the four hot kernels on a complete m-uniform hypergraph workload and
prints per-kernel wall times plus the speedup of the compiled backend.
"""
import argparse
import itertools
import math
import time

import numpy as np

from hyperinf._kernels import pure

try:
    from hyperinf._kernels import _fast as fast
except ImportError:
    fast = None


def make_workload(n, m, seed=0):
    rng = np.random.default_rng(seed)
    edges = np.array(list(itertools.combinations(range(n), m)), dtype=np.int64)
    edges = np.ascontiguousarray(edges)
    weights = np.ascontiguousarray(rng.standard_normal(len(edges)))
    v = rng.standard_normal(n)
    signs = []
    for subset in itertools.combinations(range(m), m // 2):
        row = -np.ones(m)
        row[list(subset)] = 1.0
        signs.append(row)
    patterns = np.ascontiguousarray(np.array(signs))
    entries = np.ascontiguousarray(v[edges])
    return edges, weights, v, patterns, entries


def bench(fn, args, repeat):
    fn(*args)  # warm up (and JIT nothing; just touch caches)
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=16)
    parser.add_argument("--m", type=int, default=6, choices=[2, 6])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    edges, weights, v, patterns, entries = make_workload(args.n, args.m)
    print(f"workload: complete({args.n}, {args.m}), {len(edges)} edges")

    cases = [
        ("row_products", (edges, v)),
        ("row_grad_accumulate", (edges, weights, v)),
        ("zeta_edge_values", (entries, patterns, args.m)),
        ("zeta_edge_grad", (entries, patterns, args.m)),
    ]
    for name, call_args in cases:
        t_pure = bench(getattr(pure, name), call_args, args.repeat)
        line = f"{name:22s} pure {t_pure * 1e3:9.3f} ms"
        if fast is not None:
            t_fast = bench(getattr(fast, name), call_args, args.repeat)
            line += f"   fast {t_fast * 1e3:9.3f} ms   speedup {t_pure / t_fast:6.2f}x"
        else:
            line += "   (compiled backend unavailable)"
        print(line)


if __name__ == "__main__":
    main()
