# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: one-sided Jacobi rotations and CSR*dense products.

Semantics must match dirspec.backend._reference; keep the two in sync.
Matrices arrive transposed (rows = columns of the original) so every
rotation streams over two contiguous rows.
"""

from libc.math cimport fabs, sqrt

import numpy as np


def jacobi_sweeps(double[:, ::1] gt, double[:, ::1] vt, double tol, int max_sweeps):
    """Run one-sided Jacobi sweeps in place; see the reference docstring."""
    cdef Py_ssize_t n = gt.shape[0]
    cdef Py_ssize_t m = gt.shape[1]
    cdef Py_ssize_t nv = vt.shape[1]
    cdef Py_ssize_t p, q, i, sweep
    cdef double app, aqq, apq, tau, t, c, s, xp, xq
    cdef bint rotated
    cdef double[::1] norms = np.empty(n, dtype=np.float64)

    if n < 2:
        return 1
    for sweep in range(max_sweeps):
        rotated = 0
        for p in range(n):
            app = 0.0
            for i in range(m):
                app += gt[p, i] * gt[p, i]
            norms[p] = app
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = norms[p]
                aqq = norms[q]
                if app == 0.0 or aqq == 0.0:
                    continue
                apq = 0.0
                for i in range(m):
                    apq += gt[p, i] * gt[q, i]
                if fabs(apq) <= tol * sqrt(app * aqq):
                    continue
                rotated = 1
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for i in range(m):
                    xp = gt[p, i]
                    xq = gt[q, i]
                    gt[p, i] = c * xp - s * xq
                    gt[q, i] = s * xp + c * xq
                for i in range(nv):
                    xp = vt[p, i]
                    xq = vt[q, i]
                    vt[p, i] = c * xp - s * xq
                    vt[q, i] = s * xp + c * xq
                norms[p] = c * c * app - 2.0 * c * s * apq + s * s * aqq
                norms[q] = s * s * app + 2.0 * c * s * apq + c * c * aqq
        if not rotated:
            return sweep + 1
    return -1


def csr_matmul(Py_ssize_t[::1] indptr, Py_ssize_t[::1] indices,
               double[::1] data, double[:, ::1] dense):
    """Product of a CSR matrix with a dense matrix, row by row."""
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t width = dense.shape[1]
    cdef Py_ssize_t i, jj, j, t
    cdef double v
    out_arr = np.zeros((n_rows, width), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n_rows):
        for jj in range(indptr[i], indptr[i + 1]):
            j = indices[jj]
            v = data[jj]
            for t in range(width):
                out[i, t] += v * dense[j, t]
    return out_arr
