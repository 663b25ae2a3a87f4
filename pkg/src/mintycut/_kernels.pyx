# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for cut-pool and grid-oracle evaluation.

Every function here has a numpy twin in ``_kernels_py`` with identical
semantics; ``mintycut.kernels`` picks one at import.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()


def max_affine(const double[:, ::1] A, const double[::1] c, const double[::1] x):
    """Return ``(max_i <A_i, x> - c_i, argmax)`` with the smallest index on ties."""
    cdef Py_ssize_t k = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t i, j, best_i = -1
    cdef double acc, best = -INFINITY
    if k == 0:
        raise ValueError("empty affine family")
    if x.shape[0] != n or c.shape[0] != k:
        raise ValueError("dimension mismatch")
    with nogil:
        for i in range(k):
            acc = -c[i]
            for j in range(n):
                acc = acc + A[i, j] * x[j]
            if acc > best:
                best = acc
                best_i = i
    return best, best_i


def max_affine_batch(const double[:, ::1] X, const double[:, ::1] A, const double[::1] c):
    """Row-wise ``max_i <A_i, x> - c_i`` for every row ``x`` of ``X``."""
    cdef Py_ssize_t m = X.shape[0], k = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t r, i, j, best_i
    cdef double acc, best
    if k == 0:
        raise ValueError("empty affine family")
    if X.shape[1] != n or c.shape[0] != k:
        raise ValueError("dimension mismatch")
    values = np.empty(m, dtype=np.float64)
    index = np.empty(m, dtype=np.intp)
    cdef double[::1] vv = values
    cdef Py_ssize_t[::1] iv = index
    with nogil:
        for r in range(m):
            best = -INFINITY
            best_i = -1
            for i in range(k):
                acc = -c[i]
                for j in range(n):
                    acc = acc + A[i, j] * X[r, j]
                if acc > best:
                    best = acc
                    best_i = i
            vv[r] = best
            iv[r] = best_i
    return values, index


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double da = (<double*>a)[0]
    cdef double db = (<double*>b)[0]
    if da < db:
        return 1
    if da > db:
        return -1
    return 0


def project_simplex(const double[::1] v, double scale=1.0):
    """Euclidean projection onto ``{x >= 0, sum(x) = scale}`` by sort-and-threshold."""
    cdef Py_ssize_t n = v.shape[0], i
    cdef double csum = 0.0, theta = 0.0, t
    if n == 0:
        raise ValueError("empty vector")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double* u = <double*>malloc(n * sizeof(double))
    if u == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                u[i] = v[i]
            qsort(u, n, sizeof(double), _cmp_desc)
            for i in range(n):
                csum = csum + u[i]
                t = (csum - scale) / (i + 1)
                if u[i] - t > 0:
                    theta = t
            for i in range(n):
                t = v[i] - theta
                ov[i] = t if t > 0 else 0.0
    finally:
        free(u)
    return out
