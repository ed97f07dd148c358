import json

import numpy as np
import pytest

from stlpi.benchmarks import (
    BUILTIN,
    ProblemError,
    brute_force_solve,
    build_problem,
    builtin_document,
    describe,
    in_circle,
    load_document,
    load_problem,
    passing_side,
    problem_i,
    problem_ii,
    problem_iii,
)
from stlpi.stl import And, RobustnessCostMode, check, parse_formula, robustness, satisfies
from stlpi.systems import rollout


def lq_document(K=2, x0=0.0):
    return {
        "name": "lq",
        "model": {"name": "scalar_integrator"},
        "K": K,
        "x0": [x0],
        "formula": "true",
        "predicates": {},
        "terminal_cost": {"kind": "quadratic", "target": [1.0]},
        "solver": {"J": 30, "M": 2000, "nu": 0.7, "sigma": [[1.0]], "lam": 1.0, "mode": "penalize_violation"},
    }


def polyline(points, n):
    """n samples evenly spaced in parameter along a planar polyline, padded to 4 states."""
    points = np.asarray(points, dtype=float)
    seg = np.linspace(0, len(points) - 1, n)
    i = np.minimum(seg.astype(int), len(points) - 2)
    t = (seg - i)[:, None]
    xy = points[i] * (1 - t) + points[i + 1] * t
    return np.hstack([xy, np.zeros((n, 2))])


# --------------------------------------------------------------- defaults


def test_problem_i_defaults():
    p = problem_i()
    c = p.config
    assert (c.J, c.M, c.nu, c.lam) == (19, 955, 0.3, 11.2)
    np.testing.assert_array_equal(c.sigma, [[5.6]])
    assert c.mode is RobustnessCostMode.PENALIZE_VIOLATION
    assert p.K == 10 and p.model.name == "scalar_integrator"


def test_problem_ii_defaults():
    p = problem_ii()
    c = p.config
    assert (c.J, c.M, c.nu, c.lam, c.gamma) == (75, 1140, 0.8, 60.8, 10.0)
    np.testing.assert_array_equal(c.sigma, np.diag([3.4, 3.4]))
    assert c.mode is RobustnessCostMode.MAXIMIZE_SATISFACTION
    assert p.K == 15 and p.model.dt == 1.0


def test_problem_iii_defaults():
    p = problem_iii()
    c = p.config
    assert (c.J, c.M, c.nu, c.lam) == (40, 81650, 0.8, 0.2)
    np.testing.assert_array_equal(c.sigma, np.diag([0.002, 0.002]))
    assert p.K == 50 and p.model.name == "single_track"
    assert isinstance(p.formula, And) and len(p.formula.children()) == 4


@pytest.mark.parametrize("name", BUILTIN)
def test_builtin_formula_roundtrip(name):
    p = load_problem(name)
    assert parse_formula(str(p.formula), p.predicates) == p.formula
    assert describe(name)["K"] == p.K


def test_problem_i_zero_trajectory():
    assert robustness(problem_i().formula, np.zeros((11, 1))) == 1.0


def test_in_circle_center_value():
    assert in_circle("c", (1.0, -2.0), 1.5).fn(np.array([[1.0, -2.0]]))[0] == 2.25


# ------------------------------------------------------------ problem II


def test_problem_ii_detours_satisfy_and_straight_line_violates():
    phi = problem_ii().formula
    # heading south-west, the north-west detour lies right of the start-to-goal line
    north = polyline([(2, 2), (-2, 2), (-2.5, -2.5)], 16)
    south = polyline([(2, 2), (2, -2), (-2.5, -2.5)], 16)
    straight = polyline([(2, 2), (-2.5, -2.5)], 16)
    assert satisfies(phi, north) and check(phi, north)
    assert satisfies(phi, south) and check(phi, south)
    assert not satisfies(phi, straight) and not check(phi, straight)
    goal = (-2.5, -2.5)
    assert passing_side(north, (0, 0), (2, 2), goal) == -1
    assert passing_side(south, (0, 0), (2, 2), goal) == 1


# ------------------------------------------------------------ problem III


def test_problem_iii_geometry():
    p = problem_iii()
    t = p.predicates
    x0 = p.x0[None]
    for name in ("area_above", "area_below", "area_right", "area_left"):
        assert t[name].fn(x0)[0] > 0
    # the first two task circles overlap
    doc = p.document["predicates"]
    c1, c2 = np.array(doc["in_t1"]["center"]), np.array(doc["in_t2"]["center"])
    mid = ((c1 + c2) / 2)[None]
    assert np.linalg.norm(c1 - c2) < doc["in_t1"]["radius"] + doc["in_t2"]["radius"]
    assert t["in_t1"].fn(mid)[0] > 0 and t["in_t2"].fn(mid)[0] > 0
    # straight driving along the course violates the formula
    traj = rollout(p.model, p.x0, np.zeros((p.K, 2)))
    assert robustness(p.formula, traj.states) < 0


# --------------------------------------------------------- grid oracle


def test_brute_force_lq_grid():
    cost, u = brute_force_solve(build_problem(lq_document()), np.round(np.arange(11) / 10, 10))
    np.testing.assert_array_equal(u, [[0.4], [0.4]])
    assert cost == pytest.approx(0.2, abs=1e-12)


def test_brute_force_single_point():
    cost, u = brute_force_solve(build_problem(lq_document(K=1)), [0.3])
    np.testing.assert_array_equal(u, [[0.3]])
    assert cost == pytest.approx(0.5 * 0.09 + 0.49)


def test_brute_force_ties_pick_lexicographic_minimum():
    doc = lq_document(K=2)
    doc["terminal_cost"] = {"kind": "none"}
    _, u = brute_force_solve(build_problem(doc), [1.0, -1.0])  # all four sequences cost 1
    np.testing.assert_array_equal(u, [[-1.0], [-1.0]])


def test_brute_force_budget():
    with pytest.raises(ProblemError, match="budget"):
        brute_force_solve(build_problem(lq_document(K=5)), np.arange(41))


def test_brute_force_refinement_monotone():
    spec = problem_i()
    doc = json.loads(json.dumps(spec.document))
    doc.update(K=3, x0=[1.0], formula="F[0,3](gate & F[1,3](gate))")
    mini = build_problem(doc)
    coarse, _ = brute_force_solve(mini, np.arange(-2, 2.01, 1.0))
    fine, _ = brute_force_solve(mini, np.arange(-2, 2.01, 0.5))
    finer, _ = brute_force_solve(mini, np.arange(-2, 2.01, 0.25))
    assert finer <= fine <= coarse


# ------------------------------------------------------------- documents


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("K"), "missing field"),
        (lambda d: d.update(x0=[0.0, 1.0]), "x0 has 2 entries"),
        (lambda d: d["solver"].update(temperature=1.0), "unknown solver settings"),
        (lambda d: d["predicates"]["gate"].update(kind="wedge"), "unknown kind"),
        (lambda d: d["predicates"]["gate"].pop("bound"), "missing field"),
        (lambda d: d.update(terminal_cost={"kind": "cubic"}), "unknown cost kind"),
        (lambda d: d.update(terminal_cost={"kind": "linear", "coefficients": [1, 2]}), "1 coefficients"),
    ],
)
def test_bad_documents(mutate, message):
    doc = builtin_document("problem_i")
    mutate(doc)
    with pytest.raises(ProblemError, match=message):
        build_problem(doc)


def test_load_document_from_file(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(lq_document()))
    assert load_problem(path).K == 2
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ProblemError, match="invalid JSON"):
        load_document(tmp_path / "bad.json")
    with pytest.raises(ProblemError, match="no builtin"):
        load_document(tmp_path / "missing.json")


def test_with_config_leaves_original():
    p = problem_i()
    q = p.with_config(J=2, seed=3)
    assert p.config.J == 19 and q.config.J == 2 and q.config.seed == 3
