"""Command-line interface: generate, sample, recover, audit, experiment.

Exit codes: 0 success, 1 usage error, 2 runtime failure.  Experiment runs
are fully deterministic under a fixed master seed: every (cell, trial)
derives its own seed stream, and results are written in (cell, trial)
order regardless of the worker count (HYPERINF_WORKERS).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, hypergraph, model
from .hypergraph import BoundarySemantics, UniformHypergraph
from .inference import RelaxConfig, run_pipeline
from .model import Observation, combined_failure_bound, sample_observation
from .spectral import EigenConfig, LaplacianOperator, cheeger_audit, laplacian_lambda2

CSV_COLUMNS = [
    "family",
    "n",
    "m",
    "p",
    "q",
    "phi_exact_or_bound",
    "trial",
    "seed",
    "method",
    "stage1_match",
    "exact",
    "objective",
    "wall_ms",
]


class UsageError(ValueError):
    pass


def _read_json(path: str):
    with open(path) as f:
        return json.load(f)


def _write_output(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if path:
        with open(path, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _semantics(name: str) -> BoundarySemantics:
    return BoundarySemantics(name)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_generate(args) -> int:
    if args.family == "complete":
        graph = hypergraph.complete(args.n, args.m)
    elif args.family == "erdos_renyi":
        if args.prob is None:
            raise UsageError("erdos_renyi requires --prob")
        graph = hypergraph.erdos_renyi(args.n, args.m, args.prob, args.seed)
    elif args.family == "regular_like":
        if args.degree is None:
            raise UsageError("regular_like requires --degree")
        graph, spread = hypergraph.regular_like(args.n, args.m, args.degree, args.seed)
        print(f"achieved hypervertex degree spread: {spread}", file=sys.stderr)
    elif args.family == "two_blocks_bridged":
        graph = hypergraph.two_blocks_bridged(args.n, args.m, args.bridges, args.seed)
    else:
        raise UsageError(f"unknown family {args.family!r}")
    _write_output(graph.to_json_dict(), args.out)
    return 0


def cmd_sample(args) -> int:
    graph = UniformHypergraph.from_json_dict(_read_json(args.graph))
    if args.labels:
        y_star = np.array(_read_json(args.labels), dtype=float)
    else:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((args.seed, 0))))
        y_star = rng.choice([-1.0, 1.0], size=graph.n)
    obs = sample_observation(graph, y_star, args.p, args.q, args.seed)
    _write_output(obs.to_json_dict(), args.out)
    return 0


def cmd_recover(args) -> int:
    obs = Observation.from_json_dict(_read_json(args.observation))
    ground_truth = np.array(_read_json(args.truth), dtype=float) if args.truth else None
    relax = RelaxConfig(restarts=args.restarts, seed=args.seed)
    result = run_pipeline(
        obs,
        method=args.method,
        relax_config=relax,
        certify=args.certify,
        ground_truth=ground_truth,
    )
    _write_output(result.to_json_dict(), args.out)
    return 0


def cmd_audit(args) -> int:
    graph = UniformHypergraph.from_json_dict(_read_json(args.graph))
    config = EigenConfig(restarts=args.restarts, seed=args.seed)
    audit = cheeger_audit(graph, _semantics(args.semantics), config)
    _write_output(audit.to_json_dict(), args.out)
    return 0


# ---------------------------------------------------------------------------
# Experiment harness


def _experiment_config(args) -> dict:
    if args.config:
        config = _read_json(args.config)
    else:
        config = {}
    defaults = {
        "family": "complete",
        "family_params": {},
        "n": 10,
        "m": 6,
        "p_grid": [0.0, 0.1, 0.2, 0.3, 0.4],
        "q": 0.0,
        "trials": 20,
        "method": "relax",
        "seed": 0,
        "restarts": 8,
        "semantics": "edge-set",
        "out": "experiment",
    }
    for key, value in defaults.items():
        config.setdefault(key, value)
    for key in ("family", "n", "m", "q", "trials", "method", "seed", "out"):
        flag = getattr(args, key, None)
        if flag is not None:
            config[key] = flag
    if args.p_grid is not None:
        try:
            config["p_grid"] = [float(v) for v in args.p_grid.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad p grid {args.p_grid!r}: {exc}")
    if not config["p_grid"] or config["trials"] < 1:
        raise UsageError("experiment needs a non-empty p grid and trials >= 1")
    return config


def _make_graph(config: dict, seed: int) -> UniformHypergraph:
    family = config["family"]
    params = config.get("family_params", {})
    n, m = config["n"], config["m"]
    if family == "complete":
        return hypergraph.complete(n, m)
    if family == "erdos_renyi":
        return hypergraph.erdos_renyi(n, m, params.get("prob", 0.5), seed)
    if family == "regular_like":
        return hypergraph.regular_like(n, m, params.get("degree", 2), seed)[0]
    if family == "two_blocks_bridged":
        return hypergraph.two_blocks_bridged(n, m, params.get("bridges", 2), seed)
    raise UsageError(f"unknown family {family!r}")


_PHI_CACHE: dict = {}


def _phi_for(graph: UniformHypergraph, semantics: BoundarySemantics):
    """Exact Cheeger constant when enumerable, sweep upper bound otherwise."""
    key = (graph.n, graph.m, graph.edges, semantics)
    if key not in _PHI_CACHE:
        big_n = math.comb(graph.n, graph.m // 2)
        if big_n <= hypergraph.EXACT_CHEEGER_GUARD:
            phi, _ = hypergraph.cheeger_exact(graph, semantics)
        else:
            eig = laplacian_lambda2(
                LaplacianOperator(graph), EigenConfig(restarts=4, max_iterations=800)
            )
            phi = hypergraph.cheeger_sweep(graph, eig.vector, semantics).expansion
        _PHI_CACHE[key] = phi
    return _PHI_CACHE[key]


def _run_trial(task: tuple) -> dict:
    config, cell_index, p, trial = task
    ss = np.random.SeedSequence((config["seed"], cell_index, trial))
    graph_seed, obs_seed, label_seed = (int(s) for s in ss.generate_state(3))
    graph = _make_graph(config, graph_seed)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(label_seed)))
    y_star = rng.choice([-1.0, 1.0], size=graph.n)
    obs = sample_observation(graph, y_star, p, config["q"], obs_seed)
    phi = _phi_for(graph, _semantics(config["semantics"]))
    start = time.perf_counter()
    result = run_pipeline(
        obs,
        method=config["method"],
        relax_config=RelaxConfig(restarts=config["restarts"], seed=obs_seed),
        ground_truth=y_star,
    )
    wall_ms = (time.perf_counter() - start) * 1000.0
    stage1_match = bool(
        np.array_equal(result.stage1.y_hat, y_star)
        or np.array_equal(result.stage1.y_hat, -y_star)
    )
    bound = None
    if phi > 0 and p < 0.5:
        bound = combined_failure_bound(phi, graph.n, p, config["q"], graph.edge_count, graph.m)
    return {
        "family": config["family"],
        "n": graph.n,
        "m": graph.m,
        "p": p,
        "q": config["q"],
        "phi_exact_or_bound": phi,
        "trial": trial,
        "seed": obs_seed,
        "method": config["method"],
        "stage1_match": stage1_match,
        "exact": bool(result.exact),
        "objective": result.stage1.objective,
        "wall_ms": wall_ms,
        "_bound": bound,
        "_cell": cell_index,
    }


def cmd_experiment(args) -> int:
    config = _experiment_config(args)
    tasks = [
        (config, cell_index, p, trial)
        for cell_index, p in enumerate(config["p_grid"])
        for trial in range(config["trials"])
    ]
    workers = int(os.environ.get("HYPERINF_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_trial, tasks))
    else:
        rows = [_run_trial(t) for t in tasks]

    out = config["out"]
    csv_path, summary_path, manifest_path = (
        f"{out}.csv",
        f"{out}.summary.json",
        f"{out}.manifest.json",
    )
    with open(csv_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)

    cells = []
    for cell_index, p in enumerate(config["p_grid"]):
        cell_rows = [r for r in rows if r["_cell"] == cell_index]
        bounds = [r["_bound"] for r in cell_rows if r["_bound"] is not None]
        cells.append(
            {
                "p": p,
                "trials": len(cell_rows),
                "stage1_rate": sum(r["stage1_match"] for r in cell_rows) / len(cell_rows),
                "exact_rate": sum(r["exact"] for r in cell_rows) / len(cell_rows),
                "mean_phi": sum(r["phi_exact_or_bound"] for r in cell_rows) / len(cell_rows),
                "recovery_bound": (1.0 - sum(bounds) / len(bounds)) if bounds else None,
            }
        )
    _write_output({"config": config, "cells": cells}, summary_path)

    canonical = json.dumps(config, sort_keys=True)
    manifest = {
        "version": __version__,
        "config": config,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "master_seed": config["seed"],
        "workers": workers,
    }
    _write_output(manifest, manifest_path)
    print(f"wrote {csv_path}, {summary_path}, {manifest_path}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperinf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a hypergraph JSON")
    p.add_argument("family", choices=["complete", "erdos_renyi", "regular_like", "two_blocks_bridged"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--prob", type=float)
    p.add_argument("--degree", type=int)
    p.add_argument("--bridges", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="sample a noisy observation from a graph")
    p.add_argument("graph")
    p.add_argument("--labels", help="JSON file with the ground-truth +/-1 labels")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("recover", help="run the two-stage pipeline on an observation")
    p.add_argument("observation")
    p.add_argument("--truth", help="JSON file with ground-truth labels (for the exact flag)")
    p.add_argument("--method", choices=["oracle", "relax"], default="oracle")
    p.add_argument("--certify", action="store_true")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("audit", help="Cheeger audit of a hypergraph")
    p.add_argument("graph")
    p.add_argument("--semantics", choices=["edge-set", "pair-count"], default="edge-set")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("experiment", help="noise sweep; writes CSV + summary + manifest")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--family", choices=["complete", "erdos_renyi", "regular_like", "two_blocks_bridged"])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--p-grid", dest="p_grid", help="comma-separated p values")
    p.add_argument("--q", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--method", choices=["oracle", "relax"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
