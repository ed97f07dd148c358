"""Sampling-based optimal control with signal temporal logic costs."""

from stlpi._backend import BACKEND
from stlpi.benchmarks import ProblemSpec, brute_force_solve, load_problem, problem_i, problem_ii, problem_iii
from stlpi.solver import SolverConfig, SolveResult, compute_weights, objective, sample_noise, solve
from stlpi.stl import (
    RobustnessCostMode,
    check,
    parse_formula,
    robustness,
    robustness_cost,
    satisfies,
)
from stlpi.systems import SystemModel, augment, double_integrator, rollout, scalar_integrator, single_track

__all__ = [
    "BACKEND",
    "ProblemSpec",
    "RobustnessCostMode",
    "SolveResult",
    "SolverConfig",
    "SystemModel",
    "augment",
    "brute_force_solve",
    "check",
    "compute_weights",
    "double_integrator",
    "load_problem",
    "objective",
    "parse_formula",
    "problem_i",
    "problem_ii",
    "problem_iii",
    "robustness",
    "robustness_cost",
    "rollout",
    "sample_noise",
    "satisfies",
    "scalar_integrator",
    "single_track",
    "solve",
]
