"""Deterministic global maximization of a scalar function on ``[0, 1]``.

Used for the exact line search along the segment from the current iterate
toward the Stampacchia maximizer, where the objective need not be concave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SEED_POINTS = 33
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_DIRECT_EPS = 1e-4


@dataclass(frozen=True)
class LineSearchBudget:
    max_evaluations: int = 200
    refinement_tol: float = 1e-6

    def __post_init__(self):
        if self.max_evaluations < 3:
            raise ValueError("max_evaluations must be at least 3")
        if not self.refinement_tol > 0:
            raise ValueError("refinement_tol must be positive")


def build_phi(op, x, y_bar):
    """``phi(lam) = lam * <G(x + lam (y_bar - x)), x - y_bar>``."""
    x = np.asarray(x, dtype=float)
    y_bar = np.asarray(y_bar, dtype=float)
    if x.shape != y_bar.shape:
        raise ValueError("x and y_bar must have the same shape")
    d = y_bar - x

    def phi(lam):
        if lam == 0.0:
            return 0.0
        return float(lam * (op(x + lam * d) @ (-d)))

    def many(lams):
        lams = np.asarray(lams, dtype=float)
        vals = lams * (op.evaluate_many(x + lams[:, None] * d) @ (-d))
        vals[lams == 0.0] = 0.0
        return vals

    phi.many = many
    return phi


class _Evaluator:
    def __init__(self, phi, budget):
        self.phi, self.budget = phi, budget
        self.count = 0
        self.best_lam, self.best_val = 0.0, -np.inf

    @property
    def left(self):
        return self.budget - self.count

    def __call__(self, lam):
        return self.batch([lam])[0]

    def batch(self, lams):
        """Evaluate several points at once (vectorized when ``phi.many`` exists)."""
        self.count += len(lams)
        many = getattr(self.phi, "many", None)
        vals = many(lams) if many is not None else [self.phi(t) for t in lams]
        out = []
        for lam, v in zip(lams, vals):
            v = float(v)
            if not np.isfinite(v):
                v = -np.inf
            if v > self.best_val or (v == self.best_val and lam < self.best_lam):
                self.best_lam, self.best_val = lam, v
            out.append(v)
        return out


def _potentially_optimal(half, vals, fmax):
    """Indices of intervals on the upper-right hull of ``(half_width, value)``."""
    order = sorted(range(len(half)), key=lambda i: (half[i], -vals[i], i))
    # best representative per distinct width
    reps = {}
    for i in order:
        reps.setdefault(half[i], i)
    widths = sorted(reps)
    chosen = []
    for a, w in enumerate(widths):
        i = reps[w]
        lo, hi = 0.0, np.inf
        for w2 in widths[:a]:
            j = reps[w2]
            lo = max(lo, (vals[j] - vals[i]) / (w - w2))
        for w2 in widths[a + 1:]:
            j = reps[w2]
            hi = min(hi, (vals[i] - vals[j]) / (w2 - w))
        if lo > hi:
            continue
        if np.isfinite(hi) and vals[i] + hi * w < fmax + _DIRECT_EPS * abs(fmax):
            continue
        chosen.append(i)
    return chosen


def global_max_1d(phi, budget=LineSearchBudget()):
    """Maximize ``phi`` on ``[0, 1]``; returns ``(lambda_bar, phi(lambda_bar))``.

    Endpoints plus a 33-point midpoint grid seed a DIRECT-style trisection
    phase; the remaining budget refines the incumbent by golden-section search.
    Always returns the best point evaluated.
    """
    ev = _Evaluator(phi, budget.max_evaluations)
    ev.batch([0.0, 1.0])
    n0 = min(_SEED_POINTS, max(1, ev.left))
    width = 1.0 / n0
    centers = [(i + 0.5) * width for i in range(n0)]
    half = [width / 2.0] * n0
    vals = ev.batch(centers)

    reserve = min(40, budget.max_evaluations // 4)
    while ev.left - reserve >= 2:
        chosen = _potentially_optimal(half, vals, ev.best_val)
        if not chosen:
            break
        new = []
        for i in chosen:
            if ev.left - reserve - len(new) < 2 or half[i] < budget.refinement_tol / 6:
                continue
            h = half[i] / 3.0
            c = centers[i]
            half[i] = h
            for nc in (c - 2 * h, c + 2 * h):
                centers.append(nc)
                half.append(h)
                new.append(nc)
        if not new:
            break
        vals.extend(ev.batch(new))

    # golden-section polish around the incumbent
    lam = ev.best_lam
    containing = [hw for c, hw in zip(centers, half) if abs(c - lam) <= hw + 1e-15]
    h = min(containing) if containing else width / 2.0
    a, b = max(0.0, lam - 2 * h), min(1.0, lam + 2 * h)
    if ev.left >= 2 and b - a > budget.refinement_tol:
        x1 = b - _GOLDEN * (b - a)
        x2 = a + _GOLDEN * (b - a)
        f1, f2 = ev(x1), ev(x2)
        while ev.left > 0 and b - a > budget.refinement_tol:
            if f1 >= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - _GOLDEN * (b - a)
                f1 = ev(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + _GOLDEN * (b - a)
                f2 = ev(x2)
    return ev.best_lam, ev.best_val
