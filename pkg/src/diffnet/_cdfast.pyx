# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled coordinate-descent kernel.

Mirrors the contract and update order of the pure-Python backend in
`_cdpy`; see that module for parameter documentation.
"""

import numpy as np

from libc.math cimport fabs, sqrt

NAME = "cython"


cdef inline double _mcp_weight(double t, double lam, double gamma) nogil:
    cdef double w = lam - t / gamma
    return w if w > 0.0 else 0.0


def cd_sweeps(double[::1, :] w_feat, long long[::1] starts, double[::1] res,
              double[::1] weights, double[:, ::1] beta, double[::1] hrow,
              double invn, double lam1g, double gamma1, double lam2,
              double gamma2, double tol, int max_sweeps,
              long long[::1] rows):
    cdef Py_ssize_t n_rows = rows.shape[0]
    cdef Py_ssize_t n_sets = beta.shape[1]
    cdef double[::1] znew = np.zeros(n_sets)
    cdef double max_change = 1e308
    cdef int sweeps = 0
    cdef Py_ssize_t li, l, m, k, a, b
    cdef double h, b0, z, thr, mag, gwt, scale, new, delta, dot
    cdef double norm_old_sq, norm_new_sq

    while sweeps < max_sweeps and max_change >= tol:
        sweeps += 1
        max_change = 0.0
        for li in range(n_rows):
            l = rows[li]
            h = hrow[l]
            if h <= 0.0:
                continue
            norm_old_sq = 0.0
            norm_new_sq = 0.0
            for m in range(n_sets):
                b0 = beta[l, m]
                a = starts[m]
                b = starts[m + 1]
                dot = 0.0
                for k in range(a, b):
                    dot += w_feat[k, l] * res[k]
                z = b0 + invn * dot / h
                thr = _mcp_weight(fabs(b0), lam2, gamma2) / h
                mag = fabs(z) - thr
                if mag > 0.0:
                    znew[m] = mag if z > 0.0 else -mag
                else:
                    znew[m] = 0.0
                norm_old_sq += b0 * b0
                norm_new_sq += znew[m] * znew[m]
            gwt = _mcp_weight(sqrt(norm_old_sq), lam1g, gamma1)
            if norm_new_sq > 0.0:
                scale = 1.0 - (gwt / h) / sqrt(norm_new_sq)
                if scale < 0.0:
                    scale = 0.0
            else:
                scale = 0.0
            for m in range(n_sets):
                new = scale * znew[m]
                delta = new - beta[l, m]
                if delta != 0.0:
                    a = starts[m]
                    b = starts[m + 1]
                    for k in range(a, b):
                        res[k] -= delta * w_feat[k, l] * weights[k]
                    beta[l, m] = new
                    if fabs(delta) > max_change:
                        max_change = fabs(delta)
    return sweeps, max_change
