# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core: tight C loops over the pairwise squared distances.

Computes the same quantities as the numpy fallback but entry by entry, with
the upper triangle mirrored and a hard unit diagonal for the symmetric case.
"""

import numpy as np

from libc.math cimport exp


def rbf_kernel_symmetric(double[:, ::1] X, double gamma):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, diff
    K_obj = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = K_obj
    for i in range(n):
        K[i, i] = 1.0
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = X[i, k] - X[j, k]
                s += diff * diff
            K[i, j] = exp(-gamma * s)
            K[j, i] = K[i, j]
    return K_obj


def rbf_kernel_cross(double[:, ::1] A, double[:, ::1] B, double gamma):
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = B.shape[0]
    cdef Py_ssize_t d = A.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, diff
    K_obj = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] K = K_obj
    for i in range(m):
        for j in range(n):
            s = 0.0
            for k in range(d):
                diff = A[i, k] - B[j, k]
                s += diff * diff
            K[i, j] = exp(-gamma * s)
    return K_obj
