"""Regenerate src/stlpi/data/problem_iii.json from the layout below."""

import json
import math
from pathlib import Path

K = 50
SPEED = 10.0
# Layout in course coordinates: s along the initial heading, n to its right.
# The course heads along (-1, -1)/sqrt(2), the steepest descent of the
# terminal cost p_x + p_y, so progress and satisfaction do not compete.
HEADING = -0.75 * math.pi
OBSTACLES_SN = [  # (s, n, half-size)
    (23.0, -2.6, 1.5),
    (17.0, 6.0, 1.5),
    (30.0, 5.5, 1.5),
    (41.0, -1.5, 1.5),
    (46.0, 4.5, 1.5),
]
TASKS_SN = {"t1": (30.0, 0.5, 3.0), "t2": (35.5, 0.5, 3.0), "t3": (14.0, -3.4, 3.0)}
AREA = (-45.0, 8.0, -45.0, 8.0)  # x_lo, x_hi, y_lo, y_hi


def to_world(s, n):
    d = (math.cos(HEADING), math.sin(HEADING))
    right = (d[1], -d[0])
    return s * d[0] + n * right[0], s * d[1] + n * right[1]


OBSTACLES = []
for s_, n_, h in OBSTACLES_SN:
    cx, cy = to_world(s_, n_)
    OBSTACLES.append((round(cx - h, 3), round(cx + h, 3), round(cy - h, 3), round(cy + h, 3)))
TASKS = {}
for name, (s_, n_, r) in TASKS_SN.items():
    cx, cy = to_world(s_, n_)
    TASKS[name] = (round(cx, 3), round(cy, 3), r)


def box(prefix, x_lo, x_hi, y_lo, y_hi):
    preds = {
        f"{prefix}_above": {"kind": "lower", "index": 1, "bound": y_lo},
        f"{prefix}_below": {"kind": "upper", "index": 1, "bound": y_hi},
        f"{prefix}_right": {"kind": "lower", "index": 0, "bound": x_lo},
        f"{prefix}_left": {"kind": "upper", "index": 0, "bound": x_hi},
    }
    return preds, "(" + " & ".join(preds) + ")"


def main():
    predicates = {}
    area_preds, in_area = box("area", *AREA)
    predicates.update(area_preds)
    avoid = []
    for i, ob in enumerate(OBSTACLES, 1):
        preds, in_box = box(f"obs{i}", *ob)
        predicates.update(preds)
        avoid.append("!" + in_box)
    for name, (cx, cy, r) in TASKS.items():
        predicates[f"in_{name}"] = {"kind": "in_circle", "center": [cx, cy], "radius": r, "indices": [0, 1]}
    tasks = " & ".join(f"F[0,{K}](G[0,1](in_{name}))" for name in ("t1", "t2", "t3"))
    formula = " & ".join(
        [
            f"G[0,{K}]{in_area}",
            f"G[0,{K}](" + " & ".join(avoid) + ")",
            f"({tasks})",
            f"G[0,{K}](!(in_t1 & in_t2))",
        ]
    )
    doc = {
        "name": "problem_iii",
        "description": "Single-track vehicle: stay in the area, avoid five boxes, dwell in three task circles, never in t1 and t2 at once.",
        "model": {"name": "single_track", "dt": 0.1, "wheelbase": 2.0},
        "K": K,
        "x0": [0.0, 0.0, 0.0, SPEED, HEADING],
        "formula": formula,
        "predicates": predicates,
        "terminal_cost": {"kind": "linear", "coefficients": [1.0, 1.0, 0.0, 0.0, 0.0]},
        "stage_cost": {"kind": "none"},
        "solver": {
            "J": 40,
            "M": 81650,
            "nu": 0.8,
            "sigma": [[0.002, 0.0], [0.0, 0.002]],
            "lam": 0.2,
            "gamma": 1000.0,
            "mode": "penalize_violation",
            "seed": 0,
        },
    }
    out = Path(__file__).resolve().parents[1] / "src" / "stlpi" / "data" / "problem_iii.json"
    out.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
