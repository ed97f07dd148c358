"""Benchmark problems and the exhaustive grid-search oracle.

A problem is a JSON document::

    {
      "name": "problem_i",
      "model": {"name": "scalar_integrator"},
      "K": 10,
      "x0": [0.5],
      "formula": "F[0,10](gate & F[1,10](gate))",
      "predicates": {"gate": {"kind": "upper", "index": 0, "bound": 1.0}},
      "terminal_cost": {"kind": "linear", "coefficients": [-1.0]},
      "stage_cost": {"kind": "none"},
      "solver": {"J": 19, "M": 955, "nu": 0.3, "sigma": [[5.6]], "lam": 11.2,
                 "gamma": 1.0, "mode": "penalize_violation", "seed": 0}
    }

Predicate kinds: ``upper`` (``bound - x[index]``), ``lower``
(``x[index] - bound``), ``in_circle`` (``r^2 - |x[indices] - center|^2``).
Cost kinds: ``none``, ``linear`` (``coefficients . x``), ``quadratic``
(``sum w_i (x_i - target_i)^2``).

The shipped problems I-III live in ``stlpi/data`` in this format.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

from stlpi.solver import SolverConfig, SolveResult, objective_batch, solve
from stlpi.stl import Formula, Predicate, parse_formula
from stlpi.systems import SystemModel, make_model

BUILTIN = ("problem_i", "problem_ii", "problem_iii")
MAX_GRID_EVALUATIONS = 10**8


class ProblemError(ValueError):
    pass


# ------------------------------------------------------------ vocabulary


def upper_bound(name: str, index: int, bound: float) -> Predicate:
    def fn(x):
        return bound - x[..., index]

    return Predicate(name, fn)


def lower_bound(name: str, index: int, bound: float) -> Predicate:
    def fn(x):
        return x[..., index] - bound

    return Predicate(name, fn)


def in_circle(name: str, center, radius: float, indices=(0, 1)) -> Predicate:
    i, j = indices
    cx, cy = (float(c) for c in center)
    r2 = float(radius) ** 2

    def fn(x):
        return r2 - (x[..., i] - cx) ** 2 - (x[..., j] - cy) ** 2

    return Predicate(name, fn)


def make_predicate(name: str, spec: dict) -> Predicate:
    kind = spec.get("kind")
    try:
        if kind == "upper":
            return upper_bound(name, int(spec["index"]), float(spec["bound"]))
        if kind == "lower":
            return lower_bound(name, int(spec["index"]), float(spec["bound"]))
        if kind == "in_circle":
            return in_circle(name, spec["center"], float(spec["radius"]), tuple(spec.get("indices", (0, 1))))
    except KeyError as exc:
        raise ProblemError(f"predicate {name!r} is missing field {exc}") from None
    raise ProblemError(f"predicate {name!r} has unknown kind {kind!r}")


def make_cost(spec: Optional[dict], n_x: int):
    """State cost ``(..., n_x) -> (...)`` from a selector, or ``None`` for zero."""
    if spec is None or spec.get("kind", "none") == "none":
        return None
    kind = spec["kind"]
    if kind == "linear":
        coef = np.asarray(spec["coefficients"], dtype=np.float64)
        if coef.shape != (n_x,):
            raise ProblemError(f"linear cost needs {n_x} coefficients, got {coef.size}")

        def linear(x):
            return x @ coef

        return linear
    if kind == "quadratic":
        target = np.asarray(spec["target"], dtype=np.float64)
        weights = np.asarray(spec.get("weights", np.ones(n_x)), dtype=np.float64)
        if target.shape != (n_x,) or weights.shape != (n_x,):
            raise ProblemError(f"quadratic cost needs {n_x} targets and weights")

        def quadratic(x):
            return ((x - target) ** 2) @ weights

        return quadratic
    raise ProblemError(f"unknown cost kind {kind!r}")


# --------------------------------------------------------------- problems


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    model: SystemModel
    K: int
    x0: np.ndarray
    formula: Formula
    predicates: dict
    config: SolverConfig
    document: dict

    @property
    def formula_text(self) -> str:
        return self.document["formula"]

    def with_config(self, **changes) -> ProblemSpec:
        return replace(self, config=replace(self.config, **changes))

    def solve(self, **changes) -> SolveResult:
        cfg = replace(self.config, **changes) if changes else self.config
        return solve(self.model, self.x0, self.formula, cfg, self.K)

    def objective_batch(self, U) -> np.ndarray:
        return objective_batch(self.model, self.x0, self.formula, self.config, U)


SOLVER_KEYS = ("J", "M", "nu", "sigma", "lam", "gamma", "mode", "seed", "u_init")
DOCUMENT_KEYS = (
    "name",
    "description",
    "model",
    "K",
    "x0",
    "formula",
    "predicates",
    "terminal_cost",
    "stage_cost",
    "solver",
)


def build_problem(document: dict) -> ProblemSpec:
    doc = copy.deepcopy(document)
    unknown = set(doc) - set(DOCUMENT_KEYS)
    if unknown:
        raise ProblemError(f"unknown problem fields {sorted(unknown)}")
    try:
        model_doc = dict(doc["model"])
        model = make_model(model_doc.pop("name"), **model_doc)
        K = int(doc["K"])
        x0 = np.asarray(doc["x0"], dtype=np.float64)
        table = {name: make_predicate(name, p) for name, p in doc.get("predicates", {}).items()}
        formula = parse_formula(doc["formula"], table)
        solver_doc = doc["solver"]
    except KeyError as exc:
        raise ProblemError(f"problem document is missing field {exc}") from None
    except TypeError as exc:
        raise ProblemError(f"bad problem document: {exc}") from None
    if x0.shape != (model.n_x,):
        raise ProblemError(f"x0 has {x0.size} entries, model {model.name} has {model.n_x} states")
    unknown = set(solver_doc) - set(SOLVER_KEYS)
    if unknown:
        raise ProblemError(f"unknown solver settings {sorted(unknown)}")
    kwargs = {k: solver_doc[k] for k in SOLVER_KEYS if solver_doc.get(k) is not None}
    config = SolverConfig(
        stage_cost=make_cost(doc.get("stage_cost"), model.n_x),
        terminal_cost=make_cost(doc.get("terminal_cost"), model.n_x),
        **kwargs,
    )
    return ProblemSpec(
        name=doc.get("name", "custom"),
        model=model,
        K=K,
        x0=x0,
        formula=formula,
        predicates=table,
        config=config,
        document=doc,
    )


def builtin_document(name: str) -> dict:
    if name not in BUILTIN:
        raise ProblemError(f"unknown builtin problem {name!r}; choose from {list(BUILTIN)}")
    text = resources.files("stlpi.data").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_document(source: str | Path) -> dict:
    """Builtin name or path to a JSON problem file -> raw document."""
    if str(source) in BUILTIN:
        return builtin_document(str(source))
    path = Path(source)
    if not path.is_file():
        raise ProblemError(f"no builtin problem or file named {str(source)!r}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON: {exc}") from None


def load_problem(source: str | Path) -> ProblemSpec:
    return build_problem(load_document(source))


def problem_i() -> ProblemSpec:
    """Scalar integrator: maximize x_K while x <= 1 on at least two steps."""
    return load_problem("problem_i")


def problem_ii() -> ProblemSpec:
    """Double integrator: reach a box, never enter a circular obstacle."""
    return load_problem("problem_ii")


def problem_iii() -> ProblemSpec:
    """Single-track vehicle: stay in an area, avoid five boxes, visit three task circles."""
    return load_problem("problem_iii")


# ----------------------------------------------------------------- oracle


def brute_force_solve(spec: ProblemSpec, grid, batch: int = 65536) -> tuple[float, np.ndarray]:
    """Minimize the objective over every input sequence drawn from ``grid``.

    Each of the K*n_u input entries ranges over the sorted grid values.
    Ties go to the lexicographically smallest sequence. Returns the best
    cost and its (K, n_u) input sequence.
    """
    grid = np.sort(np.unique(np.asarray(grid, dtype=np.float64)))
    dims = spec.K * spec.model.n_u
    total = len(grid) ** dims
    if total > MAX_GRID_EVALUATIONS:
        raise ProblemError(f"grid search needs {total} evaluations, budget is {MAX_GRID_EVALUATIONS}")
    radix = len(grid) ** np.arange(dims - 1, -1, -1, dtype=np.int64)
    best_cost, best_index = np.inf, -1
    for start in range(0, total, batch):
        idx = np.arange(start, min(start + batch, total), dtype=np.int64)
        digits = (idx[:, None] // radix[None, :]) % len(grid)
        U = grid[digits].reshape(-1, spec.K, spec.model.n_u)
        costs = spec.objective_batch(U)
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost, best_index = float(costs[i]), start + i
    digits = (best_index // radix) % len(grid)
    return best_cost, grid[digits].reshape(spec.K, spec.model.n_u)


def passing_side(states, center, start, goal) -> int:
    """Which side of ``center`` a planar path passes on: +1 left, -1 right, 0 through it.

    Sign of the cross product between the start-to-goal direction and the
    offset from ``center`` to the closest point of the path.
    """
    p = np.asarray(states, dtype=np.float64)[:, :2]
    c = np.asarray(center, dtype=np.float64)
    d = np.asarray(goal, dtype=np.float64) - np.asarray(start, dtype=np.float64)
    r = p[int(np.argmin(np.sum((p - c) ** 2, axis=1)))] - c
    return int(np.sign(d[0] * r[1] - d[1] * r[0]))


def problem_names() -> list[str]:
    return list(BUILTIN)


def describe(name: str) -> dict[str, Any]:
    doc = builtin_document(name)
    return {"name": name, "description": doc.get("description", ""), "K": doc["K"], "model": doc["model"]["name"]}
