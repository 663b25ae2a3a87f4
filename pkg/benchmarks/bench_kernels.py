"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--out kernels.csv]
"""

import argparse
import csv
import sys
import timeit

import numpy as np

from mintycut import _kernels_py

try:
    from mintycut import _kernels as compiled
except ImportError:
    compiled = None

COLUMNS = ["kernel", "shape", "python_sec", "cython_sec", "speedup"]


def cases(rng):
    # pool sizes and dimensions seen in the table runs (k cuts, n dims, m batch rows)
    for k, n in ((10, 50), (100, 50), (500, 100)):
        A, c, x = rng.standard_normal((k, n)), rng.standard_normal(k), rng.standard_normal(n)
        yield "max_affine", f"k={k} n={n}", lambda impl, A=A, c=c, x=x: impl.max_affine(A, c, x)
    for k, n, m in ((20, 2, 10_000), (200, 50, 2_000)):
        A, c, X = rng.standard_normal((k, n)), rng.standard_normal(k), rng.standard_normal((m, n))
        yield ("max_affine_batch", f"k={k} n={n} m={m}",
               lambda impl, A=A, c=c, X=X: impl.max_affine_batch(X, A, c))
    for n in (50, 1000):
        v = rng.standard_normal(n)
        yield "project_simplex", f"n={n}", lambda impl, v=v: impl.project_simplex(v, 1.0)


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")
    args = p.parse_args(argv)
    if compiled is None:
        print("compiled kernels not built; only the fallback is available", file=sys.stderr)
    rows = []
    for name, shape, call in cases(np.random.default_rng(args.seed)):
        t_py = best_time(lambda: call(_kernels_py), args.repeat)
        t_cy = best_time(lambda: call(compiled), args.repeat) if compiled else float("nan")
        rows.append([name, shape, f"{t_py:.3e}", f"{t_cy:.3e}", f"{t_py / t_cy:.2f}"])
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(COLUMNS)
    w.writerows(rows)
    if args.out:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
