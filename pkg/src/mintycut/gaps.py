"""Stampacchia and Minty gap functions and the cut-pool approximation."""

from __future__ import annotations

import csv
import itertools

import numpy as np

from . import kernels
from .geometry import Box
from .ipm import barrier_minimize

DUPLICATE_TOL = 1e-10
FEASIBILITY_TOL = 1e-6
# boxes up to this dimension use exact face enumeration (3**n faces) for the Minty gap
FACE_ENUM_MAX_DIM = 3


class CutPool:
    """Finite cut set ``{y_0, ..., y_k}`` with cached ``G(y_i)`` and ``<G(y_i), y_i>``.

    ``value(x) = max_i <G(y_i), x - y_i>`` is a convex piecewise-affine lower
    bound on the Minty gap.  The pool only grows.
    """

    def __init__(self, operator, fset):
        self.operator = operator
        self.set = fset
        n = fset.dim
        self._Y = np.empty((0, n))
        self._G = np.empty((0, n))
        self._c = np.empty(0)

    def __len__(self):
        return self._Y.shape[0]

    @property
    def points(self):
        return self._Y

    @property
    def directions(self):
        return self._G

    @property
    def offsets(self):
        return self._c

    def add(self, y):
        """Append ``y`` (projected onto the set first); return its index.

        A point within ``1e-10`` of an existing cut returns that cut's index.
        """
        y = np.asarray(y, dtype=float)
        if not self.set.contains(y, FEASIBILITY_TOL):
            raise ValueError("cut point lies outside the feasible set")
        y = self.set.project(y)
        if len(self):
            dist = np.linalg.norm(self._Y - y, axis=1)
            j = int(np.argmin(dist))
            if dist[j] <= DUPLICATE_TOL:
                return j
        g = np.asarray(self.operator(y), dtype=float)
        self._Y = np.vstack([self._Y, y])
        self._G = np.vstack([self._G, g])
        self._c = np.append(self._c, g @ y)
        return len(self) - 1

    def value(self, x):
        """``(max_i <g_i, x> - c_i, smallest active index)``."""
        if not len(self):
            raise ValueError("empty cut pool")
        return kernels.max_affine(self._G, self._c, x)

    def subgradient(self, x):
        return self._G[self.value(x)[1]].copy()

    def values(self, X):
        if not len(self):
            raise ValueError("empty cut pool")
        return kernels.max_affine_batch(X, self._G, self._c)

    def check_caches(self, atol=1e-12):
        G = self.operator.evaluate_many(self._Y) if len(self) else self._G
        c = np.einsum("ij,ij->i", G, self._Y)
        return bool(np.allclose(G, self._G, atol=atol) and np.allclose(c, self._c, atol=atol))


def add_cut(pool: CutPool, y):
    return pool.add(y)


def approx_minty_value(pool: CutPool, x):
    return pool.value(x)


def approx_minty_subgradient(pool: CutPool, x):
    return pool.subgradient(x)


def stampacchia_gap(op, fset, x, tol=FEASIBILITY_TOL):
    """``sup_y <G(x), x - y>`` and its maximizer, via one linear maximization."""
    x = np.asarray(x, dtype=float)
    if not fset.contains(x, tol):
        raise ValueError("point lies outside the feasible set")
    g = op(x)
    y, val = fset.linear_argmax(-g)
    return max(float(g @ x + val), 0.0), y


def minty_gap_affine(op, fset, x, tol=1e-10):
    """Exact Minty gap ``sup_y <M y + b, x - y>`` for a monotone affine operator.

    Returns ``(value, maximizer)``.  The inner problem is a concave quadratic
    maximization: solved exactly by face enumeration on boxes of dimension at
    most ``FACE_ENUM_MAX_DIM``, otherwise by the interior-point routine to
    accuracy ``tol``.
    """
    if not getattr(op, "is_affine", False):
        raise TypeError("exact Minty evaluation needs an affine operator")
    if not op.is_monotone():
        raise ValueError("affine operator is not monotone")
    x = np.asarray(x, dtype=float)
    M, b = op.M, op.b
    S = op.symmetric_part()
    lin = M.T @ x - b
    const = b @ x

    # minimize y'Sy - y'lin - const  ==  -<My + b, x - y>
    def fun(y):
        Sy = S @ y
        return y @ Sy - y @ lin - const, 2.0 * Sy - lin, 2.0 * S

    if isinstance(fset, Box) and fset.dim <= FACE_ENUM_MAX_DIM:
        y = _box_concave_qp(S, lin, fset.lower, fset.upper)
    else:
        res = barrier_minimize(fun, fset.constraints(), fset.interior_point(), tol)
        y = fset.project(res.z)
    val = float((M @ y + b) @ (x - y))
    return max(val, 0.0), y


def _box_concave_qp(S, lin, lo, hi):
    """Maximize ``-y'Sy + y'lin`` over a small box by enumerating faces.

    Some maximizer is a stationary point of a face whose reduced Hessian is
    nonsingular (or a vertex), so faces with singular ``S_FF`` can be skipped.
    """
    n = len(lin)
    best, best_y = -np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pattern = np.array(pattern)
        free = pattern == 2
        y = np.where(pattern == 0, lo, hi).astype(float)
        if free.any():
            fix = ~free
            Sff = S[np.ix_(free, free)]
            if abs(np.linalg.det(Sff)) <= 1e-14 * max(1.0, np.abs(Sff).max()) ** free.sum():
                continue
            rhs = lin[free] - 2.0 * S[np.ix_(free, fix)] @ y[fix]
            y[free] = np.linalg.solve(2.0 * Sff, rhs)
            if np.any(y < lo - 1e-12) or np.any(y > hi + 1e-12):
                continue
            y = np.clip(y, lo, hi)
        val = -y @ S @ y + y @ lin
        if val > best:
            best, best_y = val, y
    return best_y


def minty_gap_grid(op, fset, X, per_axis=100):
    """Dense-grid lower estimate of the Minty gap on a 2-d set.

    ``sup`` is taken over a ``per_axis x per_axis`` grid of the set's bounding
    box (points outside the set dropped).  Approximate: a lower bound on the
    true value.
    """
    if fset.dim != 2:
        raise ValueError("grid Minty oracle is for 2-d sets")
    lo, hi = fset.bounding_box()
    g1, g2 = np.meshgrid(np.linspace(lo[0], hi[0], per_axis), np.linspace(lo[1], hi[1], per_axis))
    Y = np.column_stack([g1.ravel(), g2.ravel()])
    Y = Y[[fset.contains(y, 1e-12) for y in Y]]
    GY = op.evaluate_many(Y)
    c = np.einsum("ij,ij->i", GY, Y)
    vals, _ = kernels.max_affine_batch(np.atleast_2d(X), GY, c)
    return vals


S_FEASIBLE = "S-feasible"
M_FEASIBLE = "M-feasible-only"
INFEASIBLE = "infeasible"


def classify_epsilon_region(op, fset, eps, grid, minty_per_axis=100):
    """Label a ``grid x grid`` lattice of a 2-d set by which inexact VI it solves.

    Returns a list of dicts with keys ``x1, x2, psi_S, psi_M_oracle, label``.
    Affine operators use the exact Minty gap; others the dense-grid oracle.
    """
    if fset.dim != 2:
        raise ValueError("region classification needs a 2-d set")
    lo, hi = fset.bounding_box()
    a1 = np.linspace(lo[0], hi[0], grid)
    a2 = np.linspace(lo[1], hi[1], grid)
    X = np.array([(u, v) for v in a2 for u in a1])
    X = X[[fset.contains(x, 1e-12) for x in X]]
    psi_s = np.array([stampacchia_gap(op, fset, x)[0] for x in X])
    if getattr(op, "is_affine", False):
        psi_m = np.array([minty_gap_affine(op, fset, x)[0] for x in X])
    else:
        psi_m = minty_gap_grid(op, fset, X, minty_per_axis)
    rows = []
    for x, s, mv in zip(X, psi_s, psi_m):
        if s <= eps:
            label = S_FEASIBLE
        elif mv <= eps:
            label = M_FEASIBLE
        else:
            label = INFEASIBLE
        rows.append({"x1": float(x[0]), "x2": float(x[1]), "psi_S": float(s),
                     "psi_M_oracle": float(mv), "label": label})
    return rows


REGION_COLUMNS = ["x1", "x2", "psi_S", "psi_M_oracle", "label"]


def write_region_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=REGION_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in r.items()})
