"""Pure numpy implementations of the hot kernels.

Mirrors ``_kernels.pyx`` function for function. Window reductions, the
ascending weighted sum and the integer hashing are bit-identical between
the two; the Gaussian transform and trig-based rollouts may differ in the
last ulp because numpy and libm use different ``log``/``cos`` routines.
"""

import numpy as np

NAME = "python"

BIG = float(np.finfo(np.float64).max)
MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
TWO_PI = 6.283185307179586
INV_2_53 = 1.0 / 9007199254740992.0


def mix64_int(z: int) -> int:
    z &= MASK
    z ^= z >> 30
    z = (z * MIX1) & MASK
    z ^= z >> 27
    z = (z * MIX2) & MASK
    return z ^ (z >> 31)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, j: int) -> int:
    """Per-iteration key; samples and steps are hashed in below it."""
    h = mix64_int((seed & MASK) ^ GOLDEN)
    return mix64_int(h + (j + 1) * GOLDEN)


def standard_normals(seed, j, m_start, count, K, n):
    """N(0, 1) draws of shape (count, K, n) for samples m_start..m_start+count-1.

    Entry (m, k, d) depends only on (seed, j, m, k, d).
    """
    key = stream_key(seed, j)
    g = np.uint64(GOLDEN)
    with np.errstate(over="ignore"):
        m = np.arange(m_start + 1, m_start + count + 1, dtype=np.uint64)
        hm = _mix64(np.uint64(key) + m * g)
        k = np.arange(1, K + 1, dtype=np.uint64)
        hk = _mix64(hm[:, None] + k[None, :] * g)
        d = np.arange(n, dtype=np.uint64)
        ca = (2 * d + 1) * g
        cb = (2 * d + 2) * g
        a = _mix64(hk[:, :, None] + ca)
        b = _mix64(hk[:, :, None] + cb)
    u1 = ((a >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * INV_2_53
    u2 = (b >> np.uint64(11)).astype(np.float64) * INV_2_53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)


def window_reduce(values, k_min, k_max, is_max):
    """out[b, k] = max/min of values[b, k+k_min : k+k_max+1], clipped to the row."""
    rows, n = values.shape
    op = np.maximum if is_max else np.minimum
    out = np.full((rows, n), -BIG if is_max else BIG)
    for d in range(k_min, min(k_max, n - 1) + 1):
        op(out[:, : n - d], values[:, d:], out=out[:, : n - d])
    return out


def until(lhs, rhs, k_min, k_max):
    rows, n = lhs.shape
    out = np.full((rows, n), -BIG)
    running = np.full((rows, n), BIG)
    for d in range(0, min(k_max, n - 1) + 1):
        np.minimum(running[:, : n - d], lhs[:, d:], out=running[:, : n - d])
        if d >= k_min:
            cand = np.minimum(rhs[:, d:], running[:, : n - d])
            np.maximum(out[:, : n - d], cand, out=out[:, : n - d])
    return out


def weighted_sum(weights, values):
    """sum_m weights[m] * values[m, :], accumulated in ascending m."""
    if values.shape[0] == 0:
        return np.zeros(values.shape[1])
    return np.cumsum(weights[:, None] * values, axis=0)[-1]


def single_track_rollout(x0, inputs, dt, wheelbase):
    rows, K, _ = inputs.shape
    X = np.empty((rows, K + 1, 5))
    X[:, 0] = x0
    for k in range(K):
        px, py, steer, v, psi = (X[:, k, i] for i in range(5))
        X[:, k + 1, 0] = px + (v * np.cos(psi)) * dt
        X[:, k + 1, 1] = py + (v * np.sin(psi)) * dt
        X[:, k + 1, 2] = steer + inputs[:, k, 0] * dt
        X[:, k + 1, 3] = v + inputs[:, k, 1] * dt
        X[:, k + 1, 4] = psi + (v / wheelbase * np.tan(steer)) * dt
    return X
