"""Operators ``G``, objectives ``f`` and problem instances.

The library always minimizes.  Welfare maximization over Cournot equilibria
is expressed with ``f = -welfare`` and ``G`` = stacked ``-grad_i g_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import FeasibleSet

_POW_FLOOR = 1e-12


def _vec(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    return x


# --------------------------------------------------------------------------- operators

class Operator:
    dim: int
    lipschitz: Optional[float] = None
    is_affine = False

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        raise NotImplementedError

    def evaluate_many(self, X):
        """Evaluate row by row; subclasses override with vectorized code."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.evaluate(x) for x in X])


class AffineOperator(Operator):
    """``G(x) = M x + b``."""

    is_affine = True

    def __init__(self, M, b, lipschitz=None):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if M.shape != (b.size, b.size):
            raise ValueError("M must be square and match b")
        self.M, self.b = M, b
        self.dim = b.size
        self.lipschitz = lipschitz

    def evaluate(self, x):
        return self.M @ _vec(x, self.dim) + self.b

    def evaluate_many(self, X):
        return np.atleast_2d(X) @ self.M.T + self.b

    def symmetric_part(self):
        return 0.5 * (self.M + self.M.T)

    def is_monotone(self, tol=1e-10):
        return bool(np.linalg.eigvalsh(self.symmetric_part()).min() >= -tol)


class LinearExpOperator(Operator):
    """Affine block plus componentwise exponentials on the leading ``n - l`` coordinates.

    ``G(x) = [M x_h + b + alpha * exp(beta * x_h); 0_l]`` with ``x_h = x[:n-l]``.
    """

    def __init__(self, M, b, alpha, beta, tail=0, lipschitz=None):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        b, alpha, beta = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (b, alpha, beta))
        m = b.size
        if M.shape != (m, m) or alpha.size != m or beta.size != m:
            raise ValueError("M, b, alpha, beta sizes disagree")
        if np.any(alpha <= 0) or np.any(beta <= 0):
            raise ValueError("alpha and beta must be strictly positive")
        if tail < 0:
            raise ValueError("tail width must be nonnegative")
        self.M, self.b, self.alpha, self.beta = M, b, alpha, beta
        self.head, self.tail = m, int(tail)
        self.dim = m + self.tail
        self.lipschitz = lipschitz

    def evaluate(self, x):
        x = _vec(x, self.dim)
        xh = x[:self.head]
        out = np.zeros(self.dim)
        out[:self.head] = self.M @ xh + self.b + self.alpha * np.exp(self.beta * xh)
        return out

    def evaluate_many(self, X):
        X = np.atleast_2d(X)
        Xh = X[:, :self.head]
        out = np.zeros_like(X, dtype=float)
        out[:, :self.head] = Xh @ self.M.T + self.b + self.alpha * np.exp(self.beta * Xh)
        return out

    def jacobian_bound(self, upper):
        """``||M|| + max_i alpha_i beta_i exp(beta_i u_i)`` for coordinates ``x_i <= u_i``."""
        d = self.alpha * self.beta * np.exp(self.beta * np.asarray(upper)[:self.head])
        return float(np.linalg.norm(self.M, 2) + d.max())


class CournotOperator(Operator):
    """Stacked ``-grad_{x_i} g_i`` for Cournot competition on a network.

    Firm ``i`` holds ``(y_i, s_i)``; profit ``g_i = sum_j s_ij p_j(S_j) - c_ij y_ij``
    with ``p_j(t) = a_j - b_j t**sigma`` and ``S_j = sum_i s_ij``.
    """

    def __init__(self, n_firms, n_locations, a, b, sigma, costs):
        self.N, self.J = int(n_firms), int(n_locations)
        self.a = np.broadcast_to(np.asarray(a, dtype=float), (self.J,)).copy()
        self.b = np.broadcast_to(np.asarray(b, dtype=float), (self.J,)).copy()
        self.sigma = float(sigma)
        self.costs = np.broadcast_to(np.asarray(costs, dtype=float), (self.N, self.J)).copy()
        self.dim = 2 * self.N * self.J
        self.lipschitz = None

    def unpack(self, x):
        z = _vec(x, self.dim).reshape(self.N, 2, self.J)
        return z[:, 0, :], z[:, 1, :]

    def total_sales(self, s):
        return np.maximum(s.sum(axis=0), 0.0)

    def evaluate(self, x):
        _, s = self.unpack(x)
        S = np.maximum(self.total_sales(s), _POW_FLOOR)
        price = self.a - self.b * S ** self.sigma
        dprice = -self.b * self.sigma * S ** (self.sigma - 1.0)
        out = np.empty((self.N, 2, self.J))
        out[:, 0, :] = self.costs
        out[:, 1, :] = -(price + s * dprice)
        return out.reshape(-1)

    def evaluate_many(self, X):
        Z = np.atleast_2d(np.asarray(X, dtype=float)).reshape(-1, self.N, 2, self.J)
        s = Z[:, :, 1, :]
        S = np.maximum(np.maximum(s.sum(axis=1), 0.0), _POW_FLOOR)[:, None, :]
        price = self.a - self.b * S ** self.sigma
        dprice = -self.b * self.sigma * S ** (self.sigma - 1.0)
        out = np.empty_like(Z)
        out[:, :, 0, :] = self.costs
        out[:, :, 1, :] = -(price + s * dprice)
        return out.reshape(Z.shape[0], -1)


class CallableOperator(Operator):
    def __init__(self, fn: Callable, dim: int, lipschitz=None, vectorized: Optional[Callable] = None):
        self.fn, self.dim, self.lipschitz = fn, int(dim), lipschitz
        self._many = vectorized

    def evaluate(self, x):
        return np.asarray(self.fn(_vec(x, self.dim)), dtype=float)

    def evaluate_many(self, X):
        if self._many is not None:
            return np.asarray(self._many(np.atleast_2d(X)), dtype=float)
        return super().evaluate_many(X)


def quadratic_pair_operator(a=1.0, b=1.0):
    """``G(x1, x2) = (a x1^2 + x2, b x2^2 - x1)``, monotone on ``[0, 1]^2`` for ``a, b >= 0``."""
    def fn(x):
        return np.array([a * x[0] ** 2 + x[1], b * x[1] ** 2 - x[0]])

    def many(X):
        return np.column_stack([a * X[:, 0] ** 2 + X[:, 1], b * X[:, 1] ** 2 - X[:, 0]])

    # Jacobian [[2a x1, 1], [-1, 2b x2]] on the unit square
    L = float(np.linalg.norm([[2 * a, 1.0], [-1.0, 2 * b]], 2))
    return CallableOperator(fn, 2, lipschitz=L, vectorized=many)


def estimate_lipschitz(op: Operator, fset: FeasibleSet, samples: int, rng, safety=1.5):
    """Lipschitz constant of ``op`` on ``fset``.

    Exact spectral norm for affine operators; otherwise ``safety`` times the
    largest difference quotient over ``samples`` random pairs drawn in order
    from ``rng`` (so the estimate is nondecreasing in ``samples``).
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    if isinstance(op, AffineOperator):
        return float(np.linalg.norm(op.M, 2))
    best = 0.0
    for _ in range(samples):
        x = fset.sample_uniform(rng)
        y = fset.sample_uniform(rng)
        d = np.linalg.norm(x - y)
        if d > 0:
            best = max(best, np.linalg.norm(op(x) - op(y)) / d)
    return safety * best


def monotonicity_violation(op: Operator, fset: FeasibleSet, pairs: int, rng):
    """Most negative ``<G(x)-G(y), x-y>`` over random pairs (``>= 0`` if none found)."""
    worst = np.inf
    for _ in range(pairs):
        x = fset.sample_uniform(rng)
        y = fset.sample_uniform(rng)
        worst = min(worst, float((op(x) - op(y)) @ (x - y)))
    return worst


# --------------------------------------------------------------------------- objectives

class Objective:
    dim: int
    has_hessian = True

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        raise NotImplementedError

    def subgradient(self, x):
        raise NotImplementedError

    def hessian(self, x):
        raise NotImplementedError


class QuadraticObjective(Objective):
    """``f(x) = <x - u, Q (x - u)>`` with symmetric positive definite ``Q``."""

    def __init__(self, Q, u):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if Q.shape != (u.size, u.size):
            raise ValueError("Q must be square and match u")
        if np.max(np.abs(Q - Q.T)) > 1e-12 * max(1.0, np.abs(Q).max()):
            raise ValueError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise ValueError("Q must be positive definite")
        self.Q, self.u = Q, u
        self.dim = u.size

    def value(self, x):
        d = _vec(x, self.dim) - self.u
        return float(d @ self.Q @ d)

    def subgradient(self, x):
        return 2.0 * self.Q @ (_vec(x, self.dim) - self.u)

    gradient = subgradient

    def hessian(self, x):
        return 2.0 * self.Q


class CournotWelfareObjective(Objective):
    """Negated social welfare ``-sum_i g_i`` (convex for ``sigma >= 0``)."""

    def __init__(self, op: CournotOperator):
        self.op = op
        self.dim = op.dim

    def welfare(self, x):
        y, s = self.op.unpack(x)
        S = self.op.total_sales(s)
        revenue = np.sum(S * (self.op.a - self.op.b * S ** self.op.sigma))
        return float(revenue - np.sum(self.op.costs * y))

    def value(self, x):
        return -self.welfare(x)

    def subgradient(self, x):
        op = self.op
        _, s = op.unpack(x)
        S = op.total_sales(s)
        g = np.empty((op.N, 2, op.J))
        g[:, 0, :] = op.costs
        g[:, 1, :] = -op.a + op.b * (op.sigma + 1.0) * S ** op.sigma
        return g.reshape(-1)

    gradient = subgradient

    def hessian(self, x):
        op = self.op
        _, s = op.unpack(x)
        S = np.maximum(op.total_sales(s), _POW_FLOOR)
        curv = op.b * (op.sigma + 1.0) * op.sigma * S ** (op.sigma - 1.0)
        H = np.zeros((op.N, 2, op.J, op.N, 2, op.J))
        for j in range(op.J):
            H[:, 1, j, :, 1, j] = curv[j]
        return H.reshape(op.dim, op.dim)


class CallableObjective(Objective):
    """Black-box convex objective; without ``hess`` only subgradient solvers apply."""

    def __init__(self, fn, subgrad, dim, hess=None):
        self.fn, self.subgrad, self.hess = fn, subgrad, hess
        self.dim = int(dim)
        self.has_hessian = hess is not None

    def value(self, x):
        return float(self.fn(_vec(x, self.dim)))

    def subgradient(self, x):
        return np.asarray(self.subgrad(_vec(x, self.dim)), dtype=float)

    def hessian(self, x):
        if self.hess is None:
            raise NotImplementedError("objective has no Hessian")
        return np.asarray(self.hess(_vec(x, self.dim)), dtype=float)


# --------------------------------------------------------------------------- instance

@dataclass
class ProblemInstance:
    operator: Operator
    objective: Objective
    set: FeasibleSet
    epsilon: float
    lipschitz: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        n = self.set.dim
        if self.operator.dim != n or self.objective.dim != n:
            raise ValueError(
                f"dimension mismatch: set {n}, operator {self.operator.dim}, "
                f"objective {self.objective.dim}")
        if self.lipschitz is None:
            self.lipschitz = self.operator.lipschitz

    @property
    def dim(self):
        return self.set.dim
