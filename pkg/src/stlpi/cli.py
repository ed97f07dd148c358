"""Command-line front end.

    stlpi run <problem> [--seed N] [--set key=value ...] [--out DIR] [--threads N]
    stlpi eval <csv> <problem>
    stlpi list

Exit codes for ``run``: 0 when the result satisfies the formula (or incurs no
violation cost), 2 when the solve finished but violates it, 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from stlpi._backend import BACKEND
from stlpi.benchmarks import (
    BUILTIN,
    DOCUMENT_KEYS,
    SOLVER_KEYS,
    ProblemError,
    ProblemSpec,
    build_problem,
    describe,
    load_document,
)
from stlpi.solver import ConfigError, SolverError
from stlpi.stl import And, FormulaError, RobustnessCostMode, check, robustness

log = logging.getLogger("stlpi")

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2


@dataclass
class RunRecord:
    problem: str
    config: dict
    seed: int
    backend: str
    iterations: list
    states: list
    inputs: list
    final_cost: float
    final_robustness: float
    satisfied: bool
    wall_clock_ms: float = field(default=0.0)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunRecord:
        return cls(**json.loads(text))


def apply_override(doc: dict, assignment: str) -> None:
    """Apply ``key=value`` to a problem document in place.

    Bare solver keys (``J=5``) address the solver section; anything else is a
    dotted path from the document root (``model.dt=0.2``). Values are read as
    JSON, falling back to a plain string.
    """
    key, sep, raw = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ProblemError(f"override {assignment!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    path = ["solver", key] if key in SOLVER_KEYS else key.split(".")
    if path[0] not in DOCUMENT_KEYS:
        raise ProblemError(f"override {key!r}: unknown field {path[0]!r}")
    node = doc
    for part in path[:-1]:
        if not isinstance(node, dict):
            raise ProblemError(f"override path {key!r} does not address a mapping")
        node = node.setdefault(part, {}) if part == "solver" else node.get(part)
    if not isinstance(node, dict):
        raise ProblemError(f"override path {key!r} does not address a mapping")
    node[path[-1]] = value


def write_csv(path: Path, states: np.ndarray, inputs: np.ndarray, dt: float) -> None:
    n_x, n_u = states.shape[1], inputs.shape[1]
    header = ["k", "t"] + [f"x{i}" for i in range(n_x)] + [f"u{i}" for i in range(n_u)]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k, x in enumerate(states):
            u = [repr(float(v)) for v in inputs[k]] if k < len(inputs) else [""] * n_u
            w.writerow([k, repr(k * dt)] + [repr(float(v)) for v in x] + u)


def read_csv(path: Path, n_x: int, n_u: int) -> tuple[np.ndarray, np.ndarray]:
    expected = ["k", "t"] + [f"x{i}" for i in range(n_x)] + [f"u{i}" for i in range(n_u)]
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != expected:
        got = rows[0] if rows else []
        raise ProblemError(f"{path}: header {got} does not match {expected}")
    body = rows[1:]
    if not body:
        raise ProblemError(f"{path}: no trajectory rows")
    states, inputs = [], []
    for i, row in enumerate(body):
        if len(row) != len(expected) or row[0] != str(i):
            raise ProblemError(f"{path}: malformed row {i + 1}: {row}")
        states.append([float(v) for v in row[2 : 2 + n_x]])
        if i < len(body) - 1:
            inputs.append([float(v) for v in row[2 + n_x :]])
    return np.array(states), np.array(inputs).reshape(-1, n_u)


def _violation_free(spec: ProblemSpec, rho: float) -> bool:
    if rho > 0:
        return True
    return spec.config.mode is RobustnessCostMode.PENALIZE_VIOLATION and rho >= 0


def cmd_run(args) -> int:
    doc = load_document(args.problem)
    for assignment in args.set or []:
        apply_override(doc, assignment)
    if args.seed is not None:
        doc.setdefault("solver", {})["seed"] = args.seed
    spec = build_problem(doc)
    t0 = time.perf_counter()
    result = spec.solve(threads=args.threads)
    elapsed = (time.perf_counter() - t0) * 1e3
    rho = result.final_robustness
    record = RunRecord(
        problem=spec.name,
        config=spec.document,
        seed=spec.config.seed,
        backend=BACKEND,
        iterations=[it.to_dict() for it in result.iterations],
        states=result.x_star.tolist(),
        inputs=result.u_star.tolist(),
        final_cost=result.final_cost,
        final_robustness=rho,
        satisfied=bool(rho > 0),
        wall_clock_ms=elapsed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{spec.name}.json").write_text(record.to_json())
    write_csv(out / f"{spec.name}.csv", result.x_star, result.u_star, spec.model.dt)
    print(f"{spec.name}: cost={result.final_cost:.6g} robustness={rho:.6g} satisfied={record.satisfied} ({elapsed:.0f} ms)")
    return EXIT_OK if _violation_free(spec, rho) else EXIT_VIOLATED


def cmd_eval(args) -> int:
    spec = build_problem(load_document(args.problem))
    states, _ = read_csv(Path(args.csv), spec.model.n_x, spec.model.n_u)
    if len(states) != spec.K + 1:
        raise ProblemError(f"{args.csv}: {len(states)} states, problem horizon needs {spec.K + 1}")
    rho = robustness(spec.formula, states)
    print(f"robustness: {rho!r}")
    print(f"satisfied: {str(rho > 0).lower()}")
    print(f"boolean check: {str(check(spec.formula, states)).lower()}")
    parts = spec.formula.children() if isinstance(spec.formula, And) else (spec.formula,)
    for i, part in enumerate(parts):
        print(f"conjunct {i}: {robustness(part, states)!r}  {part}")
    return EXIT_OK


def cmd_list(args) -> int:
    for name in BUILTIN:
        info = describe(name)
        print(f"{name:12s} K={info['K']:<3d} {info['model']:18s} {info['description']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stlpi", description="Path-integral solver for STL-cost optimal control.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a builtin problem or a JSON problem file")
    run.add_argument("problem")
    run.add_argument("--seed", type=int)
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value (repeatable)")
    run.add_argument("--out", default=".", help="output directory for <name>.json and <name>.csv")
    run.add_argument("--threads", type=int, help="worker threads (default: CPU count, capped by STLPI_THREADS)")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="robustness report for a trajectory CSV")
    ev.add_argument("csv")
    ev.add_argument("problem")
    ev.set_defaults(func=cmd_eval)

    ls = sub.add_parser("list", help="list builtin problems")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ProblemError, ConfigError, SolverError, FormulaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
