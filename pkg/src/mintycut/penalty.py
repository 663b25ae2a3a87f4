"""Penalized subproblem ``min f(x) + rho * max(0, psi_B(x) - eps)`` over the
feasible set, and the loop that raises ``rho`` until its solution satisfies
the current cuts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .geometry import Constraints
from .ipm import barrier_minimize

ESCALATION_CAP = 200
WORKING_SET_SIZE = 20
WORKING_SET_SLACK = 1e-10


class InnerSolverWarning(RuntimeWarning):
    """The inner solver hit its budget before its stopping rule."""


class PenaltyEscalationError(RuntimeError):
    """The penalty parameter was raised too many times in one loop."""


@dataclass(frozen=True)
class PenaltyState:
    rho: float = 1.0
    sigma: float = 1.2
    epsilon: float = 0.01
    increments: int = 0
    rho0: Optional[float] = None

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.sigma > 1:
            raise ValueError("sigma must exceed 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.rho0 is None:
            object.__setattr__(self, "rho0", self.rho / self.sigma ** self.increments)

    def escalated(self):
        return replace(self, rho=self.rho0 * self.sigma ** (self.increments + 1),
                       increments=self.increments + 1)


@dataclass(frozen=True)
class InnerSolverConfig:
    """``tol=None`` means ``1e-7 * (1 + |f(warm_start)|)``; scaling by the
    penalized value instead would loosen the solve as ``rho`` grows.

    ``method`` is ``"barrier"`` (default; needs objective Hessians) or
    ``"subgradient"`` (projected subgradient with Polyak steps).
    """

    tol: Optional[float] = None
    max_iterations: int = 20000
    feasibility_tol: float = 1e-8
    method: str = "auto"

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


def penalized_value(instance, pool, rho, x):
    psi = pool.value(x)[0]
    return instance.objective(x) + rho * max(0.0, psi - instance.epsilon)


def _resolve_method(instance, config):
    if config.method != "auto":
        return config.method
    return "barrier" if instance.objective.has_hessian else "subgradient"


def solve_penalized(instance, pool, state: PenaltyState, warm_start, config=InnerSolverConfig()):
    """Minimize the penalized objective over the set.

    Returns ``(x, F(x))``.  Emits :class:`InnerSolverWarning` and returns the
    best point found when the iteration budget runs out.
    """
    if not len(pool):
        raise ValueError("empty cut pool")
    warm = np.asarray(warm_start, dtype=float)
    tol = config.tol
    if tol is None:
        tol = 1e-7 * (1.0 + abs(instance.objective(warm)))
    method = _resolve_method(instance, config)
    if method == "barrier":
        x, ok = _solve_barrier(instance, pool, state.rho, tol, config.max_iterations, warm)
    elif method == "subgradient":
        x, ok = _solve_subgradient(instance, pool, state.rho, warm, tol, config.max_iterations)
    else:
        raise ValueError(f"unknown inner method {config.method!r}")
    if not ok:
        warnings.warn("penalized subproblem stopped on its iteration budget", InnerSolverWarning,
                      stacklevel=2)
    return x, penalized_value(instance, pool, state.rho, x)


def _solve_barrier(instance, pool, rho, tol, max_iterations, warm):
    """Epigraph form over ``z = (x, t)``: ``min f(x) + rho t``,
    ``t >= 0``, ``t >= <g_i, x> - c_i - eps``, ``x`` in the set.

    Only a working set of cuts enters the barrier: the ones closest to active
    at ``warm``, plus any cut the working solution violates, until none is
    violated.  The result is a solution of the full problem.
    """
    fset, f, eps = instance.set, instance.objective, instance.epsilon
    n = fset.dim
    base = fset.constraints().shifted(0, n + 1)
    t_row = np.zeros((1, n + 1))
    t_row[0, n] = -1.0
    G, c = pool.directions, pool.offsets
    K = len(pool)
    order = np.argsort(-(G @ warm - c), kind="stable")
    working = np.zeros(K, dtype=bool)
    working[order[:WORKING_SET_SIZE + 2 * n]] = True

    def fun(z):
        x = z[:n]
        g = np.empty(n + 1)
        g[:n] = f.subgradient(x)
        g[n] = rho
        H = np.zeros((n + 1, n + 1))
        H[:n, :n] = f.hessian(x)
        return f.value(x) + rho * z[n], g, H

    def value(z):
        return f.value(z[:n]) + rho * z[n]

    x0 = fset.interior_point()
    budget = max(50, max_iterations // 20)
    converged = True
    while True:
        idx = np.flatnonzero(working)
        cons = Constraints(
            n + 1,
            np.vstack([base.A_ineq, np.hstack([G[idx], -np.ones((idx.size, 1))]), t_row]),
            np.concatenate([base.b_ineq, c[idx] + eps, [0.0]]),
            base.A_eq, base.b_eq, base.balls,
        )
        t0 = max(0.0, float(np.max(G[idx] @ x0 - c[idx])) - eps) + 1.0
        res = barrier_minimize(fun, cons, np.append(x0, t0), tol, max_newton=budget, value=value)
        converged &= res.converged
        x, t = res.z[:n], res.z[n]
        excess = G @ x - c - eps - t
        violated = (excess > WORKING_SET_SLACK) & ~working
        if not violated.any():
            return fset.project(x), converged
        working |= violated


def _solve_subgradient(instance, pool, rho, warm, tol, max_iterations, patience=200):
    """Projected subgradient with Polyak steps against a running best value,
    switching to ``step0 / sqrt(t)`` when the best value stalls."""
    fset, f, eps = instance.set, instance.objective, instance.epsilon
    x = fset.project(warm)
    best_x = x
    best = penalized_value(instance, pool, rho, x)
    target_gap = max(tol, 1e-3 * (1.0 + abs(best)))
    step0 = fset.diameter() or 1.0
    last_improvement = 0
    polyak = True
    for it in range(1, max_iterations + 1):
        psi, idx = pool.value(x)
        g = f.subgradient(x)
        if psi >= eps:
            g = g + rho * pool.directions[idx]
        gn = g @ g
        if gn == 0.0:
            return x, True
        Fx = penalized_value(instance, pool, rho, x)
        if polyak:
            step = (Fx - best + target_gap) / gn
        else:
            step = step0 / np.sqrt(it) / np.sqrt(gn)
        x = fset.project(x - step * g)
        Fx = penalized_value(instance, pool, rho, x)
        if Fx < best - tol:
            best, best_x, last_improvement = Fx, x, it
        elif Fx < best:
            best, best_x = Fx, x
        if it - last_improvement > patience:
            if not polyak:
                return best_x, True
            polyak = False
            target_gap *= 0.1
            last_improvement = it
            x = best_x
    return best_x, False


def exact_penalty_loop(instance, pool, state: PenaltyState, warm_start, config=InnerSolverConfig()):
    """Solve, and while the solution violates the cuts by more than
    ``feasibility_tol`` multiply ``rho`` by ``sigma`` and solve again.

    Returns ``(x, new_state)``.
    """
    eps = instance.epsilon
    x, _ = solve_penalized(instance, pool, state, warm_start, config)
    raised = 0
    while pool.value(x)[0] > eps + config.feasibility_tol:
        if raised >= ESCALATION_CAP:
            raise PenaltyEscalationError(
                f"rho raised {raised} times without reaching cut feasibility (rho={state.rho:.3g})")
        state = state.escalated()
        raised += 1
        x, _ = solve_penalized(instance, pool, state, x, config)
    return x, state
