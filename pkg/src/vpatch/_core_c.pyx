# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the O(N^2) inner kernels.

Same contract as ``_core_py``; the reductions are fused so no (N, N)
temporaries are materialized. The elementwise log still goes through
NumPy, whose SIMD loop beats a scalar libm call per entry.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

COMPILED = True


def log_smooth_factor(double[::1] P, double[::1] Q, double[::1] dP,
                      double[::1] dQ, double[:, ::1] inv4sin2):
    cdef Py_ssize_t n = P.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] S = np.empty((n, n))
    cdef double[:, ::1] s = S
    cdef Py_ssize_t i, j
    cdef double dp, dq, v, smin = 1.0
    for i in range(n):
        for j in range(n):
            if i == j:
                v = dP[i] * dP[i] + dQ[i] * dQ[i]
            else:
                dp = P[i] - P[j]
                dq = Q[i] - Q[j]
                v = (dp * dp + dq * dq) * inv4sin2[i, j]
            s[i, j] = v
            if v < smin:
                smin = v
    if smin <= 0.0:
        return None
    return np.log(S)


def flux_reduce(double[::1] rho, double[::1] drho, double[:, ::1] sind,
                double[:, ::1] cosd, double[:, ::1] ring_w,
                double[:, ::1] log_smooth, double trap_w):
    cdef Py_ssize_t n = rho.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double acc, f, ri, di
    for i in range(n):
        acc = 0.0
        ri = rho[i]
        di = drho[i]
        for j in range(n):
            f = (di * drho[j] + ri * rho[j]) * sind[i, j] \
                + (di * rho[j] - ri * drho[j]) * cosd[i, j]
            acc += (ring_w[i, j] + trap_w * log_smooth[i, j]) * f
        o[i] = acc
    return out


def pair_reduce(double[:, ::1] G, double[:, ::1] ring_w,
                double[:, ::1] log_smooth, double trap_w):
    cdef Py_ssize_t n = G.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += (ring_w[i, j] + trap_w * log_smooth[i, j]) * G[i, j]
        o[i] = acc
    return out


def energy_reduce(double[::1] P, double[::1] Q, double[::1] dP,
                  double[::1] dQ, double[:, ::1] ring_w,
                  double[:, ::1] log_smooth, double trap_w):
    cdef Py_ssize_t n = P.shape[0]
    cdef Py_ssize_t i, j
    cdef double total = 0.0, dp, dq, m, md
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dp = P[i] - P[j]
            dq = Q[i] - Q[j]
            m = dp * dp + dq * dq
            md = m * (-2.0) * (dP[i] * dP[j] + dQ[i] * dQ[j])
            total += (ring_w[i, j] + trap_w * (log_smooth[i, j] - 2.0)) * md
    return total
