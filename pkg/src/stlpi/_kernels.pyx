# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np
from libc.math cimport sqrt, log, cos, sin, tan
from libc.stdint cimport uint64_t

NAME = "cython"

cdef double BIG = 1.7976931348623157e308
cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z ^= z >> 30
    z *= MIX1
    z ^= z >> 27
    z *= MIX2
    return z ^ (z >> 31)


def stream_key(seed, j):
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t h = mix64(s ^ GOLDEN)
    return mix64(h + <uint64_t>(j + 1) * GOLDEN)


def standard_normals(seed, long j, long m_start, long count, long K, long n):
    cdef uint64_t key = stream_key(seed, j)
    out = np.empty((count, K, n), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef long m, k, d
    cdef uint64_t hm, hk, a, b
    cdef double u1, u2
    with nogil:
        for m in range(count):
            hm = mix64(key + <uint64_t>(m_start + m + 1) * GOLDEN)
            for k in range(K):
                hk = mix64(hm + <uint64_t>(k + 1) * GOLDEN)
                for d in range(n):
                    a = mix64(hk + <uint64_t>(2 * d + 1) * GOLDEN)
                    b = mix64(hk + <uint64_t>(2 * d + 2) * GOLDEN)
                    u1 = <double>((a >> 11) + 1) * INV_2_53
                    u2 = <double>(b >> 11) * INV_2_53
                    o[m, k, d] = sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)
    return out


def window_reduce(const double[:, ::1] values, long k_min, long k_max, bint is_max):
    cdef long rows = values.shape[0], n = values.shape[1]
    out = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef long r, k, kk, hi
    cdef double acc, v
    with nogil:
        for r in range(rows):
            for k in range(n):
                acc = -BIG if is_max else BIG
                hi = k + k_max
                if hi > n - 1:
                    hi = n - 1
                for kk in range(k + k_min, hi + 1):
                    v = values[r, kk]
                    if is_max:
                        if v > acc:
                            acc = v
                    elif v < acc:
                        acc = v
                o[r, k] = acc
    return out


def until(const double[:, ::1] lhs, const double[:, ::1] rhs, long k_min, long k_max):
    cdef long rows = lhs.shape[0], n = lhs.shape[1]
    out = np.empty((rows, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef long r, k, kk, hi
    cdef double acc, running, cand
    with nogil:
        for r in range(rows):
            for k in range(n):
                acc = -BIG
                running = BIG
                hi = k + k_max
                if hi > n - 1:
                    hi = n - 1
                for kk in range(k, hi + 1):
                    if lhs[r, kk] < running:
                        running = lhs[r, kk]
                    if kk >= k + k_min:
                        cand = rhs[r, kk] if rhs[r, kk] < running else running
                        if cand > acc:
                            acc = cand
                o[r, k] = acc
    return out


def weighted_sum(const double[::1] weights, const double[:, ::1] values):
    cdef long rows = values.shape[0], cols = values.shape[1]
    out = np.zeros(cols, dtype=np.float64)
    cdef double[::1] o = out
    cdef long m, d
    with nogil:
        for m in range(rows):
            for d in range(cols):
                o[d] = o[d] + weights[m] * values[m, d]
    return out


def single_track_rollout(const double[::1] x0, const double[:, :, ::1] inputs, double dt, double wheelbase):
    cdef long rows = inputs.shape[0], K = inputs.shape[1]
    out = np.empty((rows, K + 1, 5), dtype=np.float64)
    cdef double[:, :, ::1] X = out
    cdef long r, k, i
    cdef double px, py, steer, v, psi
    with nogil:
        for r in range(rows):
            for i in range(5):
                X[r, 0, i] = x0[i]
            for k in range(K):
                px = X[r, k, 0]
                py = X[r, k, 1]
                steer = X[r, k, 2]
                v = X[r, k, 3]
                psi = X[r, k, 4]
                X[r, k + 1, 0] = px + (v * cos(psi)) * dt
                X[r, k + 1, 1] = py + (v * sin(psi)) * dt
                X[r, k + 1, 2] = steer + inputs[r, k, 0] * dt
                X[r, k + 1, 3] = v + inputs[r, k, 1] * dt
                X[r, k + 1, 4] = psi + (v / wheelbase * tan(steer)) * dt
    return out
