"""Cutting-plane exact-penalty methods for convex optimization over the
solution set of a monotone variational inequality."""

from .algorithms import AlgoParams, RunTrace, inexactness_bound, run_alg1, run_alg2, run_alg3
from .gaps import CutPool, classify_epsilon_region, minty_gap_affine, minty_gap_grid, stampacchia_gap
from .geometry import Ball, Box, CournotFirmSet, ProductSet, Simplex, make_set
from .kernels import BACKEND
from .linesearch import LineSearchBudget, build_phi, global_max_1d
from .penalty import InnerSolverConfig, PenaltyEscalationError, PenaltyState, exact_penalty_loop, solve_penalized
from .problem import (
    AffineOperator,
    CallableObjective,
    CallableOperator,
    CournotOperator,
    CournotWelfareObjective,
    LinearExpOperator,
    ProblemInstance,
    QuadraticObjective,
    estimate_lipschitz,
    monotonicity_violation,
    quadratic_pair_operator,
)

__version__ = "0.1.0"

__all__ = [
    "AffineOperator", "AlgoParams", "BACKEND", "Ball", "Box", "CallableObjective", "CallableOperator",
    "CournotFirmSet", "CournotOperator", "CournotWelfareObjective", "CutPool", "InnerSolverConfig",
    "LineSearchBudget", "LinearExpOperator", "PenaltyEscalationError", "PenaltyState", "ProblemInstance",
    "ProductSet", "QuadraticObjective", "RunTrace", "Simplex", "build_phi", "classify_epsilon_region",
    "estimate_lipschitz", "exact_penalty_loop", "global_max_1d", "inexactness_bound", "make_set",
    "minty_gap_affine", "minty_gap_grid", "monotonicity_violation", "quadratic_pair_operator",
    "run_alg1", "run_alg2", "run_alg3", "solve_penalized", "stampacchia_gap",
]
