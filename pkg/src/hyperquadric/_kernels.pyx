# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled term-merging kernel for exponential polynomials."""

import numpy as np
cimport numpy as cnp
from libc.math cimport hypot

cnp.import_array()


def cluster_sum(double[::1] fre, double[::1] fim,
                double complex[:, ::1] coeffs, double eps):
    """Merge terms whose frequencies lie within ``eps`` of a cluster head.

    Inputs must already be sorted lexicographically by (fre, fim).
    Returns (head_re, head_im, summed_coeffs) with one row per cluster.
    """
    cdef Py_ssize_t k = fre.shape[0]
    cdef Py_ssize_t m = coeffs.shape[1]
    cdef Py_ssize_t i, c, j, start = 0, ncl = 0, hit
    cdef double[::1] hre = np.empty(k, dtype=np.float64)
    cdef double[::1] him = np.empty(k, dtype=np.float64)
    out_arr = np.zeros((k, m), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr

    for i in range(k):
        while start < ncl and hre[start] < fre[i] - eps:
            start += 1
        hit = -1
        for c in range(start, ncl):
            if hypot(hre[c] - fre[i], him[c] - fim[i]) <= eps:
                hit = c
                break
        if hit < 0:
            hit = ncl
            hre[hit] = fre[i]
            him[hit] = fim[i]
            ncl += 1
        for j in range(m):
            out[hit, j] = out[hit, j] + coeffs[i, j]

    return (np.asarray(hre[:ncl]).copy(), np.asarray(him[:ncl]).copy(),
            out_arr[:ncl].copy())
