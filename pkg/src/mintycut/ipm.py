"""Log-barrier interior-point method for smooth convex problems over a
:class:`~mintycut.geometry.Constraints` description.

Used for the penalized subproblems (in epigraph form) and for exact Minty gap
evaluation with affine operators.  The returned objective is within
``gap_tol`` of the optimum when ``converged`` is true.
"""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

log = logging.getLogger(__name__)

_ARMIJO = 0.25
_SHRINK = 0.5
_CENTERING_TOL = 1e-10
_LOOSE_CENTERING_TOL = 1e-2


class BarrierResult(NamedTuple):
    z: np.ndarray
    value: float
    converged: bool
    newton_steps: int


class _Barrier:
    def __init__(self, cons):
        self.A, self.b = cons.A_ineq, cons.b_ineq
        self.balls = cons.balls
        self.m = self.A.shape[0] + len(self.balls)

    def slacks(self, z):
        s = self.b - self.A @ z
        h = np.array([r * r - np.sum((z[idx] - c) ** 2) for idx, c, r in self.balls])
        return s, h

    def value(self, z):
        s, h = self.slacks(z)
        if np.any(s <= 0) or np.any(h <= 0):
            return np.inf
        return -np.sum(np.log(s)) - np.sum(np.log(h))

    def derivatives(self, z):
        s, h = self.slacks(z)
        inv = 1.0 / s
        grad = self.A.T @ inv
        hess = (self.A.T * inv ** 2) @ self.A
        for (idx, c, _), hb in zip(self.balls, h):
            dq = 2.0 * (z[idx] - c)
            grad[idx] += dq / hb
            hess[np.ix_(idx, idx)] += np.outer(dq, dq) / hb ** 2
            hess[idx, idx] += 2.0 / hb
        return grad, hess

    def max_step(self, z, dz):
        """Largest step keeping every inequality strictly satisfied (times 0.99)."""
        t = 1.0
        s, h = self.slacks(z)
        Ad = self.A @ dz
        pos = Ad > 0
        if np.any(pos):
            t = min(t, 0.99 * np.min(s[pos] / Ad[pos]))
        for (idx, c, r), hb in zip(self.balls, h):
            d = dz[idx]
            w = z[idx] - c
            a2 = d @ d
            if a2 == 0:
                continue
            # ||w + t d||^2 = r^2  ->  a2 t^2 + 2 (w.d) t - hb = 0, positive root
            bq = w @ d
            root = (-bq + np.sqrt(bq * bq + a2 * hb)) / a2
            t = min(t, 0.99 * root)
        return t


def _null_space(Aeq):
    """Orthonormal basis of ``{d : Aeq d = 0}`` (identity when there are no equalities)."""
    if Aeq.shape[0] == 0:
        return None
    _, sv, Vt = np.linalg.svd(Aeq)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv.max())))
    return Vt[rank:].T


def _newton_direction(H, g, N):
    # steps stay in the null space of the equalities, so feasibility cannot drift
    if N is not None:
        H = N.T @ H @ N
        g = N.T @ g
    try:
        d = np.linalg.solve(H, -g)
    except np.linalg.LinAlgError:
        d = np.linalg.lstsq(H, -g, rcond=None)[0]
    return d if N is None else N @ d


def barrier_minimize(fun, cons, z0, gap_tol, max_newton=500, mu=30.0, value=None):
    """Minimize ``fun`` subject to ``cons`` starting from a strictly feasible ``z0``.

    Parameters
    ----------
    fun : callable
        ``fun(z) -> (value, gradient, hessian)`` of a convex twice
        differentiable function.
    cons : Constraints
        Inequalities must hold strictly at ``z0``; equalities exactly.
    gap_tol : float
        Target bound ``m / tau`` on the suboptimality of the returned point.
    value : callable, optional
        Cheap ``value(z)`` used during backtracking; defaults to ``fun(z)[0]``.
    """
    if value is None:
        def value(z):
            return fun(z)[0]
    bar = _Barrier(cons)
    z = np.array(z0, dtype=float)
    N = _null_space(cons.A_eq)
    if not np.isfinite(bar.value(z)):
        raise ValueError("barrier start is not strictly feasible")
    m = max(bar.m, 1)
    f0 = value(z)
    tau = max(1e-6, m / (1.0 + abs(f0)))
    steps = 0
    while True:
        # centering by damped Newton; only the last center needs to be accurate
        final = m / tau <= gap_tol
        center_tol = _CENTERING_TOL if final else _LOOSE_CENTERING_TOL
        while steps < max_newton:
            val, g0, H0 = fun(z)
            gb, Hb = bar.derivatives(z)
            g = tau * g0 + gb
            H = tau * H0 + Hb
            dz = _newton_direction(H, g, N)
            decrement = -g @ dz
            steps += 1
            phi = tau * val + bar.value(z)
            # below the roundoff of phi the decrement carries no information
            if decrement / 2.0 <= max(center_tol, 1e-14 * abs(phi)) or not np.isfinite(decrement):
                break
            t = bar.max_step(z, dz)
            while t > 1e-14:
                z_new = z + t * dz
                phi_new = tau * value(z_new) + bar.value(z_new)
                if phi_new < phi and phi_new <= phi - _ARMIJO * t * decrement:
                    break
                t *= _SHRINK
            else:
                break
            z = z_new
        if final or steps >= max_newton:
            break
        tau *= mu
    converged = m / tau <= gap_tol and steps < max_newton
    if not converged:
        log.debug("barrier stopped at gap bound %.3g after %d Newton steps", m / tau, steps)
    return BarrierResult(z, float(value(z)), converged, steps)
