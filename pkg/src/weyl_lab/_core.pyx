# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: exact maximal-average scan and chain running max.

Mirrors weyl_lab._fallback exactly; see there for the conventions.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def maxavg_exact(double[::1] cell_values):
    cdef Py_ssize_t n = cell_values.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(n, -np.inf)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pre = np.empty(n + 1)
    cdef double[::1] res = out
    cdef double[::1] S = pre
    cdef Py_ssize_t a, b
    cdef double best, avg
    S[0] = 0.0
    for a in range(n):
        S[a + 1] = S[a] + cell_values[a]
    for a in range(n):
        best = -np.inf
        for b in range(n, a, -1):
            avg = (S[b] - S[a]) / (b - a)
            if avg > best:
                best = avg
            # intervals [a,b'] with b' >= b all contain cell b-1
            if best > res[b - 1]:
                res[b - 1] = best
            # interval [a,b] ends at the left edge of cell b
            if b < n and avg > res[b]:
                res[b] = avg
    return out


def chain_runmax_haar(Py_ssize_t[::1] lo, Py_ssize_t[::1] mid,
                      Py_ssize_t[::1] hi, double[::1] amp, Py_ssize_t cells):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cur_arr = np.zeros(cells)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] run_arr = np.zeros(cells)
    cdef double[::1] cur = cur_arr
    cdef double[::1] run = run_arr
    cdef Py_ssize_t t, i, nterms = amp.shape[0]
    cdef double a, v
    for t in range(nterms):
        a = amp[t]
        for i in range(lo[t], mid[t]):
            cur[i] += a
        for i in range(mid[t], hi[t]):
            cur[i] -= a
        for i in range(lo[t], hi[t]):
            v = cur[i]
            if v < 0.0:
                v = -v
            if v > run[i]:
                run[i] = v
    return run_arr
