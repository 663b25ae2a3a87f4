"""Command line entry point: ``mintycut solve | bench | region``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import bench
from .algorithms import run_alg1, run_alg2, run_alg3
from .config import ConfigError, build_instance, build_params, load_config
from .problem import estimate_lipschitz

log = logging.getLogger("mintycut")


def _common(p, instances=True):
    p.add_argument("--seed", type=int, help="base random seed (default: config seed, else 0)")
    p.add_argument("--out", help="output path")
    if instances:
        p.add_argument("--instances", type=int, default=20, help="random instances per cell (default 20)")
    p.add_argument("--alg", type=int, choices=(1, 2, 3), default=3, help="algorithm (default 3)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="mintycut",
                                 description="Cutting-plane exact-penalty solver for optimization over "
                                             "monotone variational inequality solution sets.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance described by a YAML/JSON config")
    p.add_argument("config")
    _common(p, instances=False)
    p.add_argument("--trace", help="per-iteration CSV path")

    p = sub.add_parser("bench", help="run a benchmark sweep")
    p.add_argument("which", choices=["table1", "table2", "table3", "table4", "cournot"])
    _common(p)
    p.add_argument("--sets", default=",".join(bench.SET_KINDS),
                   help="comma-separated subset of cube,sphere,simplex (tables only)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (tables only)")
    p.add_argument("--time-limit", type=float, default=60.0, help="seconds per Cournot run (default 60)")

    p = sub.add_parser("region", help="classify a grid of [0,1]^2 by inexact-VI membership")
    p.add_argument("--op", choices=["example21", "g_ab"], default="example21")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=65 / 4096)
    p.add_argument("--grid", type=int, default=101)
    _common(p, instances=False)
    return ap


def cmd_solve(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dict(cfg, seed=args.seed)
    seed = cfg.get("seed", 0)
    inst = build_instance(cfg)
    params = build_params(cfg.get("params"))
    alg = int(cfg.get("algorithm", args.alg))
    rng = np.random.default_rng(seed)
    if alg == 1:
        tr = run_alg1(inst, params, rng)
    elif alg == 2:
        L = cfg.get("lipschitz") or inst.lipschitz
        if not L:
            L = estimate_lipschitz(inst.operator, inst.set, 1000, np.random.default_rng(seed))
        tr = run_alg2(inst, L, inst.set.diameter(), params, rng)
    else:
        tr = run_alg3(inst, params, rng)
    summary = tr.summary()
    if args.out:
        tr.write_summary(args.out)
    if args.trace:
        tr.write_csv(args.trace)
    json.dump(summary, sys.stdout, indent=2)
    print()
    return 0 if tr.converged else 1


def cmd_bench(args):
    if args.which == "cournot":
        params = replace(bench.COURNOT_PARAMS, time_limit=args.time_limit)
        summary, _ = bench.run_cournot_study(bench.CournotConfig(seed=args.seed or 0), args.instances,
                                             args.out, params)
        print(",".join(bench.COURNOT_COLUMNS))
        print(",".join(f"{summary[c]:.6g}" for c in bench.COURNOT_COLUMNS))
        return 0
    sets = tuple(s for s in args.sets.split(",") if s)
    rows = bench.run_table(args.which, args.instances, f"alg{args.alg}", args.out, args.seed or 0,
                           sets=sets, workers=args.workers)
    print(",".join(bench.TABLE_COLUMNS))
    for r in rows:
        print(",".join(r.as_csv()))
    return 0


def cmd_region(args):
    rows = bench.export_region(args.op, args.eps, args.grid, args.out, args.a, args.b)
    counts = {}
    for r in rows:
        counts[r["label"]] = counts.get(r["label"], 0) + 1
    print(json.dumps(counts))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return {"solve": cmd_solve, "bench": cmd_bench, "region": cmd_region}[args.command](args)
    except KeyError as e:
        print(f"mintycut: missing config key {e}", file=sys.stderr)
        return 2
    except (ConfigError, FileNotFoundError) as e:
        print(f"mintycut: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
