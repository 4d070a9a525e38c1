"""Command-line entry point: ``graphtest gen|stat|test|analyze|minimax|oracle|experiment``.

Exit codes: 0 success (``test``: null accepted), 3 null rejected by ``test``,
2 invalid input (bad arguments, files, specs or configs), 1 numerical or
capacity failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, minimax, oracle
from .errors import CapacityError, ConvergenceError, GraphTestError
from .generators import generate
from .graph import read_edge_list, write_edge_list
from .models import sigma_for
from .specs import Seed, Statistic, load_spec
from .statistics import edge_density, evaluate, max_degree, sigma_hat
from .twosample import REJECT, default_class_rule, run_test

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2
EXIT_REJECT = 3


def _json_default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _emit(obj, stream=None) -> None:
    stream = stream or sys.stdout
    json.dump(obj, stream, indent=2, default=_json_default)
    stream.write("\n")


def _rule(args, spec_or_none, statistic) -> str:
    if args.class_rule:
        return args.class_rule
    if statistic.kind == "lambda":
        return "ier_spectral"
    return default_class_rule(spec_or_none, statistic) if spec_or_none is not None else "ier_semisparse"


def cmd_gen(args) -> int:
    spec = load_spec(args.model)
    G = generate(spec, Seed(args.seed, args.stream))
    if args.out:
        write_edge_list(G, args.out)
    else:
        sys.stdout.write(f"n {G.n}\n")
        for u, v in G.edges():
            sys.stdout.write(f"{u} {v}\n")
    return EXIT_OK


def cmd_stat(args) -> int:
    G = read_edge_list(args.graph)
    statistic = Statistic.parse(args.statistic)
    rule = _rule(args, None, statistic)
    value = evaluate(G, statistic)
    out = {
        "n": G.n,
        "edges": G.num_edges,
        "statistic": str(statistic),
        "class_rule": rule,
        "value": value,
        "sigma_hat": sigma_hat(G, statistic, rule),
        "max_degree": max_degree(G),
    }
    if G.n >= 2:
        out["edge_density"] = edge_density(G)
    _emit(out)
    return EXIT_OK


def cmd_test(args) -> int:
    G1 = read_edge_list(args.graph1)
    G2 = read_edge_list(args.graph2)
    statistic = Statistic.parse(args.statistic)
    outcome = run_test(G1, G2, statistic, _rule(args, None, statistic))
    _emit(outcome.to_dict())
    return EXIT_REJECT if outcome.decision == REJECT else EXIT_OK


def cmd_analyze(args) -> int:
    spec = load_spec(args.model)
    statistic = Statistic.parse(args.statistic)
    rule = _rule(args, spec, statistic)
    result = sigma_for(spec, statistic, rule, mu_trials=args.mu_trials, seed=args.seed, geom_r_min=args.geom_r_min)
    _emit({"statistic": str(statistic), "class_rule": rule, **result.to_dict()})
    return EXIT_OK


def cmd_minimax(args) -> int:
    if args.gammas:
        gammas = [float(g) for g in args.gammas.split(",")]
    else:
        top = args.gamma_max if args.gamma_max is not None else min(args.p, 1 - args.p)
        gammas = np.linspace(0.0, top, args.steps).tolist()
    rows = minimax.sweep(args.n, args.p, gammas)
    stream = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: harness._fmt(v) for k, v in row.items()})
    finally:
        if args.out:
            stream.close()
    return EXIT_OK


def cmd_oracle(args) -> int:
    op = args.op
    if op == "triangles":
        G = read_edge_list(args.graph)
        _emit({"n": G.n, "triangles": oracle.naive_triangles(G)})
    elif op == "spectrum":
        G = read_edge_list(args.graph)
        _emit({"n": G.n, "eigenvalues": oracle.dense_spectrum(G)})
    elif op == "pmf":
        pmf = oracle.enumerate_distribution(load_spec(args.model))
        _emit({"size": pmf.size, "edge_order": oracle.edge_pairs(pmf.size), "probs": pmf.probs})
    elif op == "moments":
        mean, var = oracle.exact_mean_variance_fdelta(load_spec(args.model))
        _emit({"mean": mean, "variance": var})
    else:
        if not args.model2:
            raise GraphTestError(f"oracle {op} needs --model2")
        a = oracle.enumerate_distribution(load_spec(args.model))
        b = oracle.enumerate_distribution(load_spec(args.model2))
        if op == "tv":
            _emit({"tv": oracle.tv_exact(a, b)})
        else:
            _emit({"chi2_like": _finite(oracle.chi2_from_pmfs(a, b))})
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = harness.load_config(args.config)
    out = args.out or config.out
    if not out:
        raise GraphTestError("experiment needs --out or an 'out' entry in the config")

    def progress(row):
        print(
            f"cell {row['cell']}: {row['pair']} n={row['n1']} label={row['label']} "
            f"rejections={row['rejections']}/{row['completed']}",
            file=sys.stderr,
        )

    result = harness.run_experiment(config, out=out, resume=args.resume, workers=args.workers, progress=progress)
    summary_path = Path(out).with_suffix(".summary.csv")
    harness.write_summary(result.summary, summary_path)
    _emit({"out": str(out), "summary": str(summary_path), "cells": [
        {k: _finite(v) for k, v in row.items()} for row in result.summary
    ]})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphtest", description="Two-sample testing for random graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a graph and write it as an edge list")
    p.add_argument("--model", required=True, help="model spec as inline JSON or a JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_gen)

    def stat_flags(q):
        q.add_argument("--statistic", default="triangle", help="'triangle' or 'lambda:<k>'")
        q.add_argument("--class-rule", dest="class_rule", default=None)

    p = sub.add_parser("stat", help="statistic and plug-in deviation of a graph file")
    p.add_argument("graph")
    stat_flags(p)
    p.set_defaults(func=cmd_stat)

    p = sub.add_parser("test", help="run the two-sample test on two graph files")
    p.add_argument("graph1")
    p.add_argument("graph2")
    stat_flags(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("analyze", help="mean, deviation scale and class membership of a model")
    p.add_argument("--model", required=True)
    stat_flags(p)
    p.add_argument("--mu-trials", dest="mu_trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--geom-r-min", dest="geom_r_min", type=float, default=1.0, help="lower bound C on r for Geom")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("minimax", help="CSV sweep of hard-instance quantities over gamma")
    p.add_argument("--n", type=int, required=True, help="half-size: graphs have 2n vertices")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--gammas", help="comma-separated gamma values")
    p.add_argument("--gamma-max", dest="gamma_max", type=float)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--out")
    p.set_defaults(func=cmd_minimax)

    p = sub.add_parser("oracle", help="brute-force reference computations")
    p.add_argument("op", choices=["triangles", "spectrum", "pmf", "moments", "tv", "chi2"])
    p.add_argument("graph", nargs="?")
    p.add_argument("--model")
    p.add_argument("--model2")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "oracle":
        needs_graph = args.op in ("triangles", "spectrum")
        if needs_graph and not args.graph:
            parser.error(f"oracle {args.op} needs a graph file")
        if not needs_graph and not args.model:
            parser.error(f"oracle {args.op} needs --model")
    try:
        return args.func(args)
    except (ConvergenceError, CapacityError) as exc:
        print(f"graphtest: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (GraphTestError, OSError) as exc:
        print(f"graphtest: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
