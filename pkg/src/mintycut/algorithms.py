"""Outer cutting-plane loops.

All three methods share one skeleton: solve the penalized problem (raising
``rho`` until the cuts are satisfied), test a stopping rule, otherwise add a
cut that the current iterate violates.  They differ in how the cut is found:

* ``run_alg1`` uses the exact Minty gap maximizer (affine operators only);
* ``run_alg2`` moves a fixed fraction ``sqrt(eps) / (D sqrt(L))`` toward the
  Stampacchia maximizer and stops on ``psi_S <= 2 D sqrt(L eps)``;
* ``run_alg3`` picks that fraction by a global line search and needs
  neither ``L`` nor ``D``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .gaps import CutPool, minty_gap_affine, stampacchia_gap
from .linesearch import LineSearchBudget, build_phi, global_max_1d
from .penalty import InnerSolverConfig, PenaltyState, exact_penalty_loop

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlgoParams:
    rho0: float = 1.0
    sigma: float = 1.2
    delta0: float = 1e-3
    max_outer_iterations: int = 500
    inner: InnerSolverConfig = field(default_factory=InnerSolverConfig)
    linesearch: LineSearchBudget = field(default_factory=LineSearchBudget)
    minty_tol: float = 1e-10
    # benchmark-only stop: |f(x_k) - f(x_{k-1})| <= practical_df and psi_S(x_k) <= practical_gap
    practical_stop: bool = False
    practical_df: float = 1e-3
    practical_gap: float = 1e-2
    time_limit: Optional[float] = None

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if not self.sigma > 1:
            raise ValueError("sigma must exceed 1")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be positive")

    def delta(self, k):
        return self.delta0 / (k + 1)


@dataclass
class IterationRecord:
    iteration: int
    x: np.ndarray
    f: float
    approx_gap: float
    psi_S: float
    rho: float
    rho_increments: int
    cuts: int
    time_sec: float
    cut_value: float = math.nan
    minty_gap: float = math.nan


TRACE_COLUMNS = ["iteration", "f", "approx_gap", "psi_S", "rho", "rho_increments", "cuts",
                 "time_sec", "cut_value", "minty_gap"]


@dataclass
class RunTrace:
    algorithm: str
    epsilon: float
    E: float = math.nan
    records: list = field(default_factory=list)
    reason: str = ""
    time_sec: float = 0.0
    cut_points: Optional[np.ndarray] = None

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def x(self):
        return self.final.x

    @property
    def eps_tilde(self):
        return self.final.psi_S

    @property
    def ratio(self):
        return self.eps_tilde / self.E if self.E > 0 else math.nan

    @property
    def rho_increments(self):
        return self.final.rho_increments

    @property
    def cuts(self):
        """Cuts added after the initial random one."""
        return self.final.cuts - 1

    @property
    def converged(self):
        return self.reason in ("gap", "practical")

    def summary(self):
        """Run summary as a JSON-ready dict; unknown values (e.g. E without L) are None."""
        out = {
            "algorithm": self.algorithm, "epsilon": self.epsilon, "reason": self.reason,
            "iterations": len(self.records), "time_sec": self.time_sec,
            "rho": self.final.rho, "rho_increments": self.rho_increments, "cuts": self.cuts,
            "f": self.final.f, "eps_tilde": self.eps_tilde, "E": self.E, "ratio": self.ratio,
            "x": self.x.tolist(),
        }
        return {k: None if isinstance(v, float) and not math.isfinite(v) else v for k, v in out.items()}

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for r in self.records:
                d = asdict(r)
                w.writerow([d[c] if isinstance(d[c], int) else f"{d[c]:.12g}" for c in TRACE_COLUMNS])

    def write_summary(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def inexactness_bound(D, L, eps):
    """``E = 2 D sqrt(L eps)``."""
    return 2.0 * D * math.sqrt(L * eps)


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _drive(instance, params, rng, name, cut_step, E=math.nan):
    """Shared outer loop.

    ``cut_step(k, x, psi_s, y_bar)`` returns ``(stop, cut_point, cut_value, minty)``.
    """
    fset, op, f, eps = instance.set, instance.operator, instance.objective, instance.epsilon
    feas_tol = params.inner.feasibility_tol
    rng = _rng(rng)
    pool = CutPool(op, fset)
    y0 = fset.sample_uniform(rng)
    pool.add(y0)
    state = PenaltyState(params.rho0, params.sigma, eps)
    trace = RunTrace(name, eps, E)
    x = pool.points[0]
    t_start = time.perf_counter()
    f_prev = None
    for k in range(params.max_outer_iterations):
        x, state = exact_penalty_loop(instance, pool, state, x, params.inner)
        fx = f(x)
        psi_s, y_bar = stampacchia_gap(op, fset, x)
        rec = IterationRecord(k, x, fx, pool.value(x)[0], psi_s, state.rho, state.increments,
                              len(pool), 0.0)
        trace.records.append(rec)

        if params.practical_stop and f_prev is not None \
                and abs(fx - f_prev) <= params.practical_df and psi_s <= params.practical_gap:
            trace.reason = "practical"
            break
        stop, y_new, cut_value, minty = cut_step(k, x, psi_s, y_bar)
        rec.cut_value, rec.minty_gap = cut_value, minty
        if stop:
            trace.reason = "gap"
            break
        before = len(pool)
        pool.add(y_new)
        if len(pool) == before or pool.value(x)[0] <= eps + feas_tol:
            log.warning("%s: cut at iteration %d does not separate the iterate", name, k)
            trace.reason = "stalled"
            break
        rec.cuts = len(pool)
        rec.time_sec = time.perf_counter() - t_start
        f_prev = fx
        if params.time_limit is not None and rec.time_sec > params.time_limit:
            trace.reason = "time_limit"
            break
    else:
        trace.reason = "max_iterations"
        log.warning("%s: reached %d outer iterations", name, params.max_outer_iterations)
    trace.time_sec = time.perf_counter() - t_start
    trace.final.time_sec = trace.time_sec
    trace.cut_points = pool.points.copy()
    return trace


def run_alg1(instance, params=AlgoParams(), rng=None):
    """Cuts from the exact Minty gap maximizer; stops when ``psi_M(x_k) <= eps``."""
    op, fset, eps = instance.operator, instance.set, instance.epsilon
    if not getattr(op, "is_affine", False):
        raise TypeError("run_alg1 needs an affine operator (exact Minty gap)")
    if not op.is_monotone():
        raise ValueError("affine operator is not monotone")
    feas_tol = params.inner.feasibility_tol

    def step(k, x, psi_s, y_bar):
        tol = min(params.minty_tol, params.delta(k) / 2)
        psi_m, y = minty_gap_affine(op, fset, x, tol)
        if psi_m <= eps + feas_tol:
            return True, None, math.nan, psi_m
        return False, y, float(op(y) @ (x - y)), psi_m

    D = fset.diameter()
    E = inexactness_bound(D, instance.lipschitz, eps) if instance.lipschitz else math.nan
    return _drive(instance, params, rng, "alg1", step, E)


def run_alg2(instance, L, D, params=AlgoParams(), rng=None):
    """Fixed-step cuts toward the Stampacchia maximizer; needs ``L`` and ``D``."""
    eps = instance.epsilon
    if not (L > 0 and D > 0):
        raise ValueError("L and D must be positive")
    if eps > D * D * L:
        raise ValueError("need eps <= D^2 L")
    E = inexactness_bound(D, L, eps)
    lam = math.sqrt(eps) / (D * math.sqrt(L))
    op = instance.operator

    def step(k, x, psi_s, y_bar):
        if psi_s <= E:
            return True, None, math.nan, math.nan
        y = x + lam * (y_bar - x)
        return False, y, float(op(y) @ (x - y)), math.nan

    return _drive(instance, params, rng, "alg2", step, E)


def run_alg3(instance, params=AlgoParams(), rng=None):
    """Line-search cuts toward the Stampacchia maximizer; stops when the best
    point on the segment gives ``<G(y), x_k - y> <= eps``."""
    op, eps = instance.operator, instance.epsilon
    feas_tol = params.inner.feasibility_tol

    def step(k, x, psi_s, y_bar):
        lam, val = global_max_1d(build_phi(op, x, y_bar), params.linesearch)
        if val <= eps + feas_tol:
            return True, None, val, math.nan
        return False, x + lam * (y_bar - x), val, math.nan

    L = instance.lipschitz
    E = inexactness_bound(instance.set.diameter(), L, eps) if L else math.nan
    return _drive(instance, params, rng, "alg3", step, E)


