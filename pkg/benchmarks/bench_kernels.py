"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times each hot kernel on solver-sized inputs, then one end-to-end solve per
backend (each in a fresh interpreter, since the backend is fixed at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from stlpi import _fallback

try:
    from stlpi import _kernels
except ImportError:
    sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")

SOLVE = (
    "import time; from stlpi.benchmarks import problem_iii; p = problem_iii(); "
    "t = time.perf_counter(); p.solve(M=8000, J=5); print(time.perf_counter() - t)"
)


def cases():
    rng = np.random.default_rng(0)
    signals = rng.normal(size=(2048, 51))
    weights = rng.random(8000)
    weights /= weights.sum()
    eps = rng.normal(size=(8000, 100))
    inputs = rng.normal(scale=0.05, size=(2048, 50, 2))
    x0 = np.array([0.0, 0.0, 0.0, 10.0, -2.356])
    return {
        "standard_normals 2048x50x2": lambda k: k.standard_normals(0, 1, 0, 2048, 50, 2),
        "window_reduce 2048x51 [0,50]": lambda k: k.window_reduce(signals, 0, 50, True),
        "until 2048x51 [0,50]": lambda k: k.until(signals, signals, 0, 50),
        "weighted_sum 8000x100": lambda k: k.weighted_sum(weights, eps),
        "single_track_rollout 2048x50": lambda k: k.single_track_rollout(x0, inputs, 0.1, 2.0),
    }


def end_to_end(backend):
    env = dict(os.environ, STLPI_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"{'kernel':32s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        t_cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:8.1f}x")

    t_py, t_cy = end_to_end("python"), end_to_end("cython")
    print(f"{'problem_iii solve, M=8000, J=5':32s} {t_py * 1e3:10.0f} {t_cy * 1e3:10.0f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
