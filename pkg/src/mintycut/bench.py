"""Random instance generators and the experiment runners behind ``mintycut bench``.

Two families are provided: quadratic objectives over monotone
linear-plus-exponential variational inequalities on the unit cube, ball and
simplex, and welfare maximization over Nash-Cournot equilibria on a network.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .algorithms import AlgoParams, run_alg1, run_alg2, run_alg3
from .gaps import classify_epsilon_region, write_region_csv
from .geometry import Box, CournotFirmSet, ProductSet, make_set
from .problem import (
    CournotOperator,
    CournotWelfareObjective,
    LinearExpOperator,
    ProblemInstance,
    QuadraticObjective,
    estimate_lipschitz,
    quadratic_pair_operator,
)

log = logging.getLogger(__name__)

SET_KINDS = ("cube", "sphere", "simplex")
TABLE_COLUMNS = ["set", "param", "time_sec", "rho_increments", "cuts", "eps_tilde", "E", "ratio"]
COURNOT_COLUMNS = ["mean_time_sec", "max_time_sec", "mean_eps_tilde", "mean_welfare"]
LIPSCHITZ_PAIRS = 1000
LIPSCHITZ_STREAMS = 5
ALPHA_RANGE = (0.1, 1.0)
BETA_RANGE = (0.1, 0.5)


@dataclass(frozen=True)
class Problem1Config:
    n: int = 50
    l: int = 10
    set_kind: str = "cube"
    b_norm: float = 0.0
    L_target: float = 20.0
    epsilon: float = 0.01
    seed: object = 0

    def __post_init__(self):
        if not 0 <= self.l < self.n:
            raise ValueError("need 0 <= l < n")
        if self.set_kind not in SET_KINDS:
            raise ValueError(f"set_kind must be one of {SET_KINDS}")
        if self.b_norm < 0:
            raise ValueError("b_norm must be nonnegative")
        if not (self.L_target > 0 and self.epsilon > 0):
            raise ValueError("L_target and epsilon must be positive")


@dataclass(frozen=True)
class CournotConfig:
    n_firms: int = 4
    n_locations: int = 3
    sigma: float = 1.05
    a: Sequence[float] = (1.0, 1.0, 1.0)
    b: Sequence[float] = (0.01, 0.01, 0.01)
    capacities: Optional[Sequence[Sequence[float]]] = None  # default 5 everywhere
    cost_range: tuple = (0.1, 1.0)
    epsilon: float = 1e-6
    seed: object = 0

    def __post_init__(self):
        if self.sigma < 1:
            raise ValueError("sigma must be >= 1 for a monotone operator")
        if len(self.a) != self.n_locations or len(self.b) != self.n_locations:
            raise ValueError("a and b need one entry per location")
        lo, hi = self.cost_range
        if not 0 <= lo <= hi:
            raise ValueError("bad cost range")

    def capacity_matrix(self):
        if self.capacities is None:
            return np.full((self.n_firms, self.n_locations), 5.0)
        B = np.asarray(self.capacities, dtype=float)
        if B.shape != (self.n_firms, self.n_locations):
            raise ValueError("capacities must be n_firms x n_locations")
        return B


@dataclass
class TableRow:
    set: str
    param: float
    time_sec: float
    rho_increments: float
    cuts: float
    eps_tilde: float
    E: float
    ratio: float

    def __post_init__(self):
        if not math.isclose(self.ratio, self.eps_tilde / self.E, rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError("ratio must equal eps_tilde / E")
        if self.eps_tilde > self.E + 1e-9:
            raise ValueError(f"eps_tilde {self.eps_tilde:.6g} exceeds the bound E={self.E:.6g}")

    def as_csv(self):
        return [self.set, f"{self.param:.12g}"] + [f"{getattr(self, c):.6g}" for c in TABLE_COLUMNS[2:]]


# --------------------------------------------------------------------------- generators

def _random_monotone_matrix(m, rng):
    """Nonsymmetric matrix with positive definite symmetric part."""
    Qo, _ = np.linalg.qr(rng.standard_normal((m, m)))
    S = (Qo * rng.uniform(0.75, 1.0, m)) @ Qo.T
    S = (S + S.T) / 2.0
    A = rng.standard_normal((m, m))
    K = A - A.T
    K *= 0.5 * np.linalg.norm(S, 2) / np.linalg.norm(K, 2)
    return S + K


def gen_problem1(cfg: Problem1Config) -> ProblemInstance:
    """Quadratic objective over a linear-plus-exponential monotone VI.

    The operator is zero on the last ``l`` coordinates, so its solution set has
    dimension at least ``l``.  ``(M, alpha)`` are rescaled together so the
    sampled Lipschitz estimate on the set equals ``L_target``; ``b`` is drawn
    uniformly on the sphere of radius ``b_norm``.
    """
    rng = np.random.default_rng(cfg.seed)
    n, m = cfg.n, cfg.n - cfg.l
    fset = make_set(cfg.set_kind, n)

    M = _random_monotone_matrix(m, rng)
    alpha = rng.uniform(*ALPHA_RANGE, m)
    beta = rng.uniform(*BETA_RANGE, m)
    d = rng.standard_normal(m)
    b = cfg.b_norm * d / np.linalg.norm(d)

    # the difference quotient is 1-homogeneous in a common factor on (M, alpha);
    # calibrate on the median of a few independent estimates
    raw_op = LinearExpOperator(M, b, alpha, beta, cfg.l)
    streams = np.random.SeedSequence(cfg.seed).spawn(LIPSCHITZ_STREAMS)
    raw = float(np.median([estimate_lipschitz(raw_op, fset, LIPSCHITZ_PAIRS, np.random.default_rng(sq))
                           for sq in streams]))
    scale = cfg.L_target / raw
    op = LinearExpOperator(scale * M, b, scale * alpha, beta, cfg.l, lipschitz=cfg.L_target)

    A = rng.standard_normal((n, n))
    Q = A.T @ A + np.eye(n)
    u = fset.sample_uniform(rng)
    return ProblemInstance(op, QuadraticObjective(Q, u), fset, cfg.epsilon, cfg.L_target,
                           meta={"config": cfg, "scale": scale})


def gen_cournot(cfg: CournotConfig) -> ProblemInstance:
    rng = np.random.default_rng(cfg.seed)
    costs = rng.uniform(*cfg.cost_range, size=(cfg.n_firms, cfg.n_locations))
    op = CournotOperator(cfg.n_firms, cfg.n_locations, cfg.a, cfg.b, cfg.sigma, costs)
    fset = ProductSet([CournotFirmSet(row) for row in cfg.capacity_matrix()])
    return ProblemInstance(op, CournotWelfareObjective(op), fset, cfg.epsilon,
                           meta={"config": cfg, "costs": costs})


# --------------------------------------------------------------------------- tables

# swept parameter name and values per table; the rest of the config is fixed
TABLES = {
    "table1": ("b_norm", lambda n: [0.0, math.sqrt(n), math.sqrt(2 * n), math.sqrt(3 * n)],
               dict(n=50, l=10, L_target=20.0, epsilon=0.01)),
    "table2": ("L_target", lambda n: [20.0, 50.0, 100.0],
               dict(n=50, l=10, b_norm=5 * math.sqrt(6), epsilon=0.01)),
    "table3": ("epsilon", lambda n: [1.0, 0.1, 0.01, 0.001],
               dict(n=50, l=10, b_norm=10.0, L_target=20.0)),
    "table4": ("n", lambda n: [25, 50, 75, 100],
               dict(L_target=20.0, epsilon=0.01)),
}

BENCH_PARAMS = AlgoParams(practical_stop=True)


def table_cells(family, sets=SET_KINDS, values=None):
    """``[(set_kind, param_value, base_config_kwargs)]`` for one table."""
    if family not in TABLES:
        raise ValueError(f"unknown table {family!r}")
    name, sweep, fixed = TABLES[family]
    vals = sweep(fixed.get("n", 50)) if values is None else list(values)
    cells = []
    for kind in sets:
        for v in vals:
            kw = dict(fixed, set_kind=kind)
            kw[name] = v
            if name == "n":
                kw["n"] = int(v)
                kw["l"] = int(v) // 5
                kw["b_norm"] = math.sqrt(2 * int(v))
            cells.append((kind, v, kw))
    return cells


def run_problem1(cfg: Problem1Config, algorithm="alg3", params=BENCH_PARAMS, run_seed=None):
    inst = gen_problem1(cfg)
    rng = np.random.default_rng(run_seed if run_seed is not None else [0])
    if algorithm == "alg1":
        return run_alg1(inst, params, rng)
    if algorithm == "alg2":
        return run_alg2(inst, cfg.L_target, inst.set.diameter(), params, rng)
    if algorithm == "alg3":
        return run_alg3(inst, params, rng)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _cell_job(args):
    kw, seed, i, algorithm, params = args
    cfg = Problem1Config(seed=(seed, i), **kw)
    tr = run_problem1(cfg, algorithm, params, run_seed=(seed, i, 1))
    return {"time_sec": tr.time_sec, "rho_increments": tr.rho_increments, "cuts": tr.cuts,
            "eps_tilde": tr.eps_tilde, "E": tr.E, "reason": tr.reason}


def run_cell(kw, instances, algorithm="alg3", seed=0, params=BENCH_PARAMS, workers=1):
    """Per-instance results (list of dicts) for one table cell."""
    jobs = [(kw, seed, i, algorithm, params) for i in range(instances)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_cell_job, jobs))
    return [_cell_job(j) for j in jobs]


def aggregate(set_kind, param, runs):
    mean = {k: float(np.mean([r[k] for r in runs]))
            for k in ("time_sec", "rho_increments", "cuts", "eps_tilde", "E")}
    return TableRow(set_kind, float(param), mean["time_sec"], mean["rho_increments"], mean["cuts"],
                    mean["eps_tilde"], mean["E"], mean["eps_tilde"] / mean["E"])


def run_table(family, instances_per_cell=20, algorithm="alg3", out=None, seed=0,
              sets=SET_KINDS, values=None, params=BENCH_PARAMS, workers=1):
    """Run every cell of a table sweep and write mean rows to ``out`` (CSV).

    Returns the list of :class:`TableRow`.  Rows are emitted in (set, param) order.
    """
    rows = []
    for kind, v, kw in table_cells(family, sets, values):
        runs = run_cell(kw, instances_per_cell, algorithm, seed, params, workers)
        bad = [r["reason"] for r in runs if r["reason"] not in ("gap", "practical")]
        if bad:
            log.warning("%s %s=%s: %d runs did not converge (%s)", family, kind, v, len(bad), bad)
        row = aggregate(kind, v, runs)
        log.info("%s %s %s: %s", family, kind, v, row)
        rows.append(row)
    if out is not None:
        write_table_csv(rows, out)
    return rows


def write_table_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())


# --------------------------------------------------------------------------- cournot

COURNOT_PARAMS = AlgoParams(practical_stop=True, time_limit=60.0, max_outer_iterations=100_000)


def run_cournot_study(cfg: CournotConfig = CournotConfig(), instances=20, out=None,
                      params=COURNOT_PARAMS):
    """Algorithm 3 on ``instances`` random cost draws.

    Returns ``(summary, runs)`` where ``summary`` has the keys of
    ``COURNOT_COLUMNS`` and ``runs`` holds per-instance results.
    """
    base = cfg.seed
    runs = []
    for i in range(instances):
        inst = gen_cournot(replace(cfg, seed=(base, i)))
        tr = run_alg3(inst, params, np.random.default_rng((base, i, 1)))
        welfare = -tr.final.f
        runs.append({"time_sec": tr.time_sec, "eps_tilde": tr.eps_tilde, "welfare": welfare,
                     "reason": tr.reason, "rho_increments": tr.rho_increments, "cuts": tr.cuts})
        log.info("cournot %d: welfare %.4f psi_S %.3g (%s)", i, welfare, tr.eps_tilde, tr.reason)
    times = [r["time_sec"] for r in runs]
    summary = {
        "mean_time_sec": float(np.mean(times)),
        "max_time_sec": float(np.max(times)),
        "mean_eps_tilde": float(np.mean([r["eps_tilde"] for r in runs])),
        "mean_welfare": float(np.mean([r["welfare"] for r in runs])),
    }
    if out is not None:
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(COURNOT_COLUMNS)
            w.writerow([f"{summary[c]:.6g}" for c in COURNOT_COLUMNS])
    return summary, runs


# --------------------------------------------------------------------------- regions

def region_operator(name, a=1.0, b=1.0):
    if name == "example21":
        return quadratic_pair_operator(1.0, 1.0)
    if name == "g_ab":
        return quadratic_pair_operator(a, b)
    raise ValueError(f"unknown region operator {name!r}")


def export_region(name="example21", eps=65 / 4096, grid=101, out=None, a=1.0, b=1.0,
                  minty_per_axis=200):
    """Classify a ``grid x grid`` lattice of the unit square; optionally write CSV."""
    if grid < 10:
        raise ValueError("grid must be at least 10")
    rows = classify_epsilon_region(region_operator(name, a, b), Box.cube(2), eps, grid,
                                   minty_per_axis)
    if out is not None:
        write_region_csv(rows, out)
    return rows
