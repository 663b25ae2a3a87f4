"""Convex compact feasible sets and their oracles.

Every set exposes projection, linear maximization, diameter, membership and
sampling, plus an explicit constraint description (:class:`Constraints`)
used by the interior-point inner solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


@dataclass
class Constraints:
    """``A_ineq x <= b_ineq``, ``A_eq x = b_eq`` and ball constraints.

    Each ball is ``(index, center, radius)`` meaning
    ``||x[index] - center|| <= radius``.
    """

    n: int
    A_ineq: np.ndarray
    b_ineq: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    balls: list = field(default_factory=list)

    @staticmethod
    def empty(n):
        return Constraints(n, np.zeros((0, n)), np.zeros(0), np.zeros((0, n)), np.zeros(0), [])

    def shifted(self, offset, n_total):
        """Embed into a larger variable vector starting at ``offset``."""
        def widen(A):
            out = np.zeros((A.shape[0], n_total))
            out[:, offset:offset + self.n] = A
            return out

        balls = [(idx + offset, c, r) for idx, c, r in self.balls]
        return Constraints(n_total, widen(self.A_ineq), self.b_ineq.copy(),
                           widen(self.A_eq), self.b_eq.copy(), balls)

    @staticmethod
    def stack(parts, n_total):
        return Constraints(
            n_total,
            np.vstack([p.A_ineq for p in parts]),
            np.concatenate([p.b_ineq for p in parts]),
            np.vstack([p.A_eq for p in parts]),
            np.concatenate([p.b_eq for p in parts]),
            [b for p in parts for b in p.balls],
        )


class FeasibleSet:
    """Base class; subclasses are immutable after construction."""

    dim: int

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        return x

    def project(self, x):
        raise NotImplementedError

    def linear_argmax(self, c):
        """Return ``(y, <c, y>)`` with ``y`` maximizing ``<c, .>`` over the set."""
        raise NotImplementedError

    def diameter(self):
        raise NotImplementedError

    def contains(self, x, tol=1e-9):
        raise NotImplementedError

    def sample_uniform(self, rng):
        raise NotImplementedError

    def interior_point(self):
        """A point in the relative interior (strictly inside every inequality)."""
        raise NotImplementedError

    def constraints(self) -> Constraints:
        raise NotImplementedError

    def bounding_box(self):
        """Per-coordinate ``(lower, upper)`` bounds valid on the set."""
        raise NotImplementedError


class Box(FeasibleSet):
    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1 or lower.size == 0:
            raise ValueError("box bounds must be 1-d arrays of equal length")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper componentwise")
        self.lower, self.upper = lower, upper
        self.dim = lower.size

    @classmethod
    def cube(cls, n, lo=0.0, hi=1.0):
        return cls(np.full(n, lo), np.full(n, hi))

    def __repr__(self):
        return f"Box(dim={self.dim})"

    def project(self, x):
        return np.clip(self._check(x), self.lower, self.upper)

    def linear_argmax(self, c):
        c = self._check(c)
        y = np.where(c > 0, self.upper, self.lower)
        return y, float(c @ y)

    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x, tol=1e-9):
        x = self._check(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def sample_uniform(self, rng):
        return rng.uniform(self.lower, self.upper)

    def interior_point(self):
        return 0.5 * (self.lower + self.upper)

    def constraints(self):
        n = self.dim
        eye = np.eye(n)
        # degenerate coordinates (lower == upper) become equalities
        fixed = self.lower == self.upper
        free = ~fixed
        A_ineq = np.vstack([eye[free], -eye[free]])
        b_ineq = np.concatenate([self.upper[free], -self.lower[free]])
        return Constraints(n, A_ineq, b_ineq, eye[fixed], self.lower[fixed], [])

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()


class Ball(FeasibleSet):
    def __init__(self, center, radius=1.0):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if center.ndim != 1 or center.size == 0:
            raise ValueError("ball center must be a non-empty 1-d array")
        if not radius > 0:
            raise ValueError("ball radius must be positive")
        self.center, self.radius = center, float(radius)
        self.dim = center.size

    @classmethod
    def unit(cls, n):
        return cls(np.zeros(n), 1.0)

    def __repr__(self):
        return f"Ball(dim={self.dim}, radius={self.radius})"

    def project(self, x):
        d = self._check(x) - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return self.center + d
        return self.center + d * (self.radius / nd)

    def linear_argmax(self, c):
        c = self._check(c)
        nc = np.linalg.norm(c)
        if nc == 0.0:
            return self.center.copy(), 0.0
        y = self.center + (self.radius / nc) * c
        return y, float(c @ self.center + self.radius * nc)

    def diameter(self):
        return 2.0 * self.radius

    def contains(self, x, tol=1e-9):
        return bool(np.linalg.norm(self._check(x) - self.center) <= self.radius + tol)

    def sample_uniform(self, rng):
        g = rng.standard_normal(self.dim)
        g /= np.linalg.norm(g)
        r = self.radius * rng.uniform() ** (1.0 / self.dim)
        return self.center + r * g

    def interior_point(self):
        return self.center.copy()

    def constraints(self):
        c = Constraints.empty(self.dim)
        c.balls = [(np.arange(self.dim), self.center.copy(), self.radius)]
        return c

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


class Simplex(FeasibleSet):
    """``{x >= 0, sum(x) = scale}``."""

    def __init__(self, n, scale=1.0):
        if n < 1:
            raise ValueError("simplex dimension must be positive")
        if not scale > 0:
            raise ValueError("simplex scale must be positive")
        self.dim, self.scale = int(n), float(scale)

    def __repr__(self):
        return f"Simplex(dim={self.dim}, scale={self.scale})"

    def project(self, x):
        return kernels.project_simplex(self._check(x), self.scale)

    def linear_argmax(self, c):
        c = self._check(c)
        i = int(np.argmax(c))
        y = np.zeros(self.dim)
        y[i] = self.scale
        return y, float(self.scale * c[i])

    def diameter(self):
        return self.scale * np.sqrt(2.0) if self.dim > 1 else 0.0

    def contains(self, x, tol=1e-9):
        x = self._check(x)
        return bool(np.all(x >= -tol) and abs(x.sum() - self.scale) <= tol)

    def sample_uniform(self, rng):
        return self.scale * rng.dirichlet(np.ones(self.dim))

    def interior_point(self):
        return np.full(self.dim, self.scale / self.dim)

    def constraints(self):
        n = self.dim
        return Constraints(n, -np.eye(n), np.zeros(n), np.ones((1, n)), np.array([self.scale]), [])

    def bounding_box(self):
        return np.zeros(self.dim), np.full(self.dim, self.scale)


class CournotFirmSet(FeasibleSet):
    """Decisions ``(y, s)`` of one firm: ``0 <= y <= B``, ``s >= 0``, ``sum(s) = sum(y)``."""

    def __init__(self, capacities):
        B = np.atleast_1d(np.asarray(capacities, dtype=float))
        if B.ndim != 1 or B.size == 0:
            raise ValueError("capacities must be a non-empty 1-d array")
        if np.any(B <= 0):
            raise ValueError("capacities must be positive")
        self.capacities = B
        self.locations = B.size
        self.dim = 2 * B.size

    def __repr__(self):
        return f"CournotFirmSet(J={self.locations})"

    def split(self, x):
        return x[:self.locations], x[self.locations:]

    def project(self, x):
        y0, s0 = self.split(self._check(x))
        B = self.capacities

        # y = clip(y0 + nu, 0, B), s = max(s0 - nu, 0); balance is monotone in nu
        def excess(nu):
            return np.clip(y0 + nu, 0.0, B).sum() - np.maximum(s0 - nu, 0.0).sum()

        knots = np.unique(np.concatenate([-y0, B - y0, s0]))
        vals = np.array([excess(k) for k in knots])
        if vals[0] >= 0:
            # left of every knot: y = 0 and s = s0 - nu, so excess = J*nu - sum(s0)
            nu = s0.sum() / self.locations
        else:
            # right of every knot the excess is sum(B) > 0, so a sign change exists
            j = int(np.argmax(vals >= 0))
            lo, hi = knots[j - 1], knots[j]
            flo, fhi = vals[j - 1], vals[j]
            nu = lo - flo * (hi - lo) / (fhi - flo)
        return np.concatenate([np.clip(y0 + nu, 0.0, B), np.maximum(s0 - nu, 0.0)])

    def linear_argmax(self, c):
        p, q = self.split(self._check(c))
        jstar = int(np.argmax(q))
        margin = p + q[jstar]
        y = np.where(margin > 0, self.capacities, 0.0)
        s = np.zeros(self.locations)
        s[jstar] = y.sum()
        out = np.concatenate([y, s])
        return out, float(c @ out)

    def diameter(self):
        # bounding-box overestimate: y_j in [0, B_j], s_j in [0, sum(B)]
        J = self.locations
        return float(np.sqrt(np.sum(self.capacities ** 2) + J * self.capacities.sum() ** 2))

    def contains(self, x, tol=1e-9):
        y, s = self.split(self._check(x))
        return bool(np.all(y >= -tol) and np.all(y <= self.capacities + tol)
                    and np.all(s >= -tol) and abs(s.sum() - y.sum()) <= tol)

    def sample_uniform(self, rng):
        y = rng.uniform(0.0, self.capacities)
        s = rng.uniform(0.0, self.capacities.sum() / self.locations, size=self.locations)
        return self.project(np.concatenate([y, s]))

    def interior_point(self):
        y = 0.5 * self.capacities
        s = np.full(self.locations, y.sum() / self.locations)
        return np.concatenate([y, s])

    def constraints(self):
        J = self.locations
        eye = np.eye(2 * J)
        A_ineq = np.vstack([eye[:J], -eye])
        b_ineq = np.concatenate([self.capacities, np.zeros(2 * J)])
        A_eq = np.concatenate([-np.ones(J), np.ones(J)])[None, :]
        return Constraints(2 * J, A_ineq, b_ineq, A_eq, np.zeros(1), [])

    def bounding_box(self):
        J = self.locations
        return np.zeros(2 * J), np.concatenate([self.capacities, np.full(J, self.capacities.sum())])


class ProductSet(FeasibleSet):
    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ValueError("product needs at least one factor")
        self.factors = factors
        self.offsets = np.cumsum([0] + [f.dim for f in factors])
        self.dim = int(self.offsets[-1])

    def __repr__(self):
        return f"ProductSet({self.factors!r})"

    def blocks(self, x):
        return [x[a:b] for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    def project(self, x):
        x = self._check(x)
        return np.concatenate([f.project(b) for f, b in zip(self.factors, self.blocks(x))])

    def linear_argmax(self, c):
        c = self._check(c)
        parts = [f.linear_argmax(b) for f, b in zip(self.factors, self.blocks(c))]
        return np.concatenate([p[0] for p in parts]), float(sum(p[1] for p in parts))

    def diameter(self):
        return float(np.sqrt(sum(f.diameter() ** 2 for f in self.factors)))

    def contains(self, x, tol=1e-9):
        x = self._check(x)
        return all(f.contains(b, tol) for f, b in zip(self.factors, self.blocks(x)))

    def sample_uniform(self, rng):
        return np.concatenate([f.sample_uniform(rng) for f in self.factors])

    def interior_point(self):
        return np.concatenate([f.interior_point() for f in self.factors])

    def constraints(self):
        parts = [f.constraints().shifted(int(o), self.dim)
                 for f, o in zip(self.factors, self.offsets[:-1])]
        return Constraints.stack(parts, self.dim)

    def bounding_box(self):
        boxes = [f.bounding_box() for f in self.factors]
        return np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes])


def make_set(kind, n=None, **kw):
    """Build a set from a short description (used by config files and the bench).

    ``kind`` is one of ``cube``, ``box``, ``sphere``/``ball``, ``simplex``,
    ``cournot`` (a product of identical firm sets).
    """
    if kind == "cube":
        return Box.cube(n, kw.get("lower", 0.0), kw.get("upper", 1.0))
    if kind == "box":
        return Box(kw["lower"], kw["upper"])
    if kind in ("sphere", "ball"):
        center = kw.get("center")
        center = np.zeros(n) if center is None else np.asarray(center, float)
        return Ball(center, kw.get("radius", 1.0))
    if kind == "simplex":
        return Simplex(n, kw.get("scale", 1.0))
    if kind == "cournot":
        B = np.asarray(kw["capacities"], dtype=float)
        return ProductSet([CournotFirmSet(row) for row in np.atleast_2d(B)])
    raise ValueError(f"unknown set kind {kind!r}")
