# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Lawson-Hanson kernel over the Gram system.

Semantics mirror ``_lawson_hanson.nnls_gram`` exactly (same pivoting, same
lowest-index tie-breaking, same iteration budgets).  Passive-set systems are
solved by an in-place Cholesky factorization; if a passive Gram block is not
positive definite (duplicated measurement columns), the kernel reports
STATUS_SINGULAR and the wrapper reruns the problem on the Python backend,
which handles rank deficiency via least squares.
"""

import numpy as np

from libc.math cimport sqrt, INFINITY

STATUS_OK = 0
STATUS_SINGULAR = 1

DEF INNER_SLACK = 10


cdef int _chol_solve(double* app, double* rhs, double* z, Py_ssize_t k) noexcept nogil:
    # lower-triangular Cholesky in place (row-major k x k), then two sweeps
    cdef Py_ssize_t i, j, p
    cdef double s
    for j in range(k):
        s = app[j * k + j]
        for p in range(j):
            s -= app[j * k + p] * app[j * k + p]
        if s <= 0.0:
            return 1
        app[j * k + j] = sqrt(s)
        for i in range(j + 1, k):
            s = app[i * k + j]
            for p in range(j):
                s -= app[i * k + p] * app[j * k + p]
            app[i * k + j] = s / app[j * k + j]
    for i in range(k):
        s = rhs[i]
        for p in range(i):
            s -= app[i * k + p] * z[p]
        z[i] = s / app[i * k + i]
    for i in range(k - 1, -1, -1):
        s = z[i]
        for p in range(i + 1, k):
            s -= app[p * k + i] * z[p]
        z[i] = s / app[i * k + i]
    return 0


def nnls_gram(double[:, ::1] ata, double[::1] atb, double eps, long max_iter):
    """Minimize ||b - A x|| s.t. x >= 0 given A^T A and A^T b.

    Returns (x, outer_iterations, converged, status).
    """
    cdef Py_ssize_t n = atb.shape[0]
    cdef Py_ssize_t i, j, p, k, best, pivot
    cdef long outer = 0
    cdef long inner_budget = INNER_SLACK * max_iter + 100
    cdef double wmax, s, alpha, ratio

    x_arr = np.zeros(n)
    w_arr = np.asarray(atb).copy()
    passive_arr = np.zeros(n, dtype=np.uint8)
    usable_arr = np.zeros(n, dtype=np.uint8)
    idx_arr = np.zeros(n, dtype=np.intp)
    app_arr = np.zeros(n * n)
    rhs_arr = np.zeros(n)
    z_arr = np.zeros(n)

    cdef double[::1] x = x_arr
    cdef double[::1] w = w_arr
    cdef unsigned char[::1] passive = passive_arr
    cdef unsigned char[::1] usable = usable_arr
    cdef Py_ssize_t[::1] idx = idx_arr
    cdef double[::1] app = app_arr
    cdef double[::1] rhs = rhs_arr
    cdef double[::1] z = z_arr

    for i in range(n):
        if ata[i, i] > 0.0:
            usable[i] = 1

    while True:
        # most positive dual among non-passive usable columns; first wins ties
        best = -1
        wmax = eps
        for i in range(n):
            if not passive[i] and usable[i] and w[i] > wmax:
                wmax = w[i]
                best = i
        if best < 0:
            return x_arr, outer, True, STATUS_OK
        if outer >= max_iter:
            return x_arr, outer, False, STATUS_OK
        outer += 1
        passive[best] = 1

        while True:
            inner_budget -= 1
            if inner_budget <= 0:
                return x_arr, outer, False, STATUS_OK
            k = 0
            for i in range(n):
                if passive[i]:
                    idx[k] = i
                    k += 1
            for i in range(k):
                for j in range(k):
                    app[i * k + j] = ata[idx[i], idx[j]]
                rhs[i] = atb[idx[i]]
            if _chol_solve(&app[0], &rhs[0], &z[0], k) != 0:
                return x_arr, outer, False, STATUS_SINGULAR

            for i in range(k):
                if z[i] <= 0.0:
                    break
            else:
                for i in range(n):
                    x[i] = 0.0
                for i in range(k):
                    x[idx[i]] = z[i]
                break

            alpha = INFINITY
            pivot = -1
            for i in range(k):
                if z[i] <= 0.0:
                    s = x[idx[i]] - z[i]
                    ratio = x[idx[i]] / s if s > 0.0 else 0.0
                    if ratio < alpha:
                        alpha = ratio
                        pivot = i
            for i in range(k):
                x[idx[i]] = x[idx[i]] + alpha * (z[i] - x[idx[i]])
            x[idx[pivot]] = 0.0
            for i in range(k):
                if x[idx[i]] <= 0.0:
                    x[idx[i]] = 0.0
                    passive[idx[i]] = 0

        for i in range(n):
            s = atb[i]
            for p in range(k):
                s -= ata[i, idx[p]] * x[idx[p]]
            w[i] = s
