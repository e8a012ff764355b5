# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tensor kernels: batched diagonal evaluation, gradient map, and
the full shifted power-iteration loop. Mirrors ``_kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "compiled"


cdef void _apply_one(const double* t, int d, int n, const double* x, double* out) noexcept nogil:
    cdef int i, j, k, l
    cdef double acc, xj, xjk
    if d == 1:
        for i in range(n):
            out[i] = t[i]
    elif d == 2:
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += t[i * n + j] * x[j]
            out[i] = acc
    elif d == 3:
        for i in range(n):
            acc = 0.0
            for j in range(n):
                xj = x[j]
                for k in range(n):
                    acc += t[(i * n + j) * n + k] * xj * x[k]
            out[i] = acc
    else:
        for i in range(n):
            acc = 0.0
            for j in range(n):
                xj = x[j]
                for k in range(n):
                    xjk = xj * x[k]
                    for l in range(n):
                        acc += t[((i * n + j) * n + k) * n + l] * xjk * x[l]
            out[i] = acc


cdef double _dot(const double* a, const double* b, int n) noexcept nogil:
    cdef int i
    cdef double s = 0.0
    for i in range(n):
        s += a[i] * b[i]
    return s


def diagonal_values(cnp.ndarray tensor, cnp.ndarray points):
    """T[v, ..., v] for each row v of ``points``. Returns shape (m,)."""
    cdef cnp.ndarray[double, ndim=1] t = np.ascontiguousarray(tensor, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=2] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef int d = tensor.ndim
    cdef int n = p.shape[1]
    cdef Py_ssize_t m = p.shape[0], a
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] work = np.empty(n, dtype=np.float64)
    cdef double* tp = &t[0]
    cdef double* wp = &work[0]
    with nogil:
        for a in range(m):
            _apply_one(tp, d, n, &p[a, 0], wp)
            out[a] = _dot(&p[a, 0], wp, n)
    return out


def diagonal_apply(cnp.ndarray tensor, cnp.ndarray points):
    """Gradient map T[v, ..., v, .] for each row v. Returns shape (m, n)."""
    cdef cnp.ndarray[double, ndim=1] t = np.ascontiguousarray(tensor, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=2] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef int d = tensor.ndim
    cdef int n = p.shape[1]
    cdef Py_ssize_t m = p.shape[0], a
    cdef cnp.ndarray[double, ndim=2] out = np.empty((m, n), dtype=np.float64)
    cdef double* tp = &t[0]
    with nogil:
        for a in range(m):
            _apply_one(tp, d, n, &p[a, 0], &out[a, 0])
    return out


def power_opnorm(cnp.ndarray tensor, cnp.ndarray starts, double shift, double tol, int max_iter):
    """Largest fixed-point value of the shifted power map over all restarts."""
    cdef cnp.ndarray[double, ndim=1] t = np.ascontiguousarray(tensor, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=2] s = np.ascontiguousarray(starts, dtype=np.float64)
    cdef int d = tensor.ndim
    cdef int n = s.shape[1]
    cdef Py_ssize_t restarts = s.shape[0], r
    cdef int it, i
    cdef double val, new_val, nrm, best = -np.inf
    cdef cnp.ndarray[double, ndim=1] x = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.empty(n, dtype=np.float64)
    cdef double* tp = &t[0]
    cdef double* xp = &x[0]
    cdef double* wp = &w[0]
    with nogil:
        for r in range(restarts):
            nrm = sqrt(_dot(&s[r, 0], &s[r, 0], n))
            if nrm < 1e-300:
                nrm = 1e-300
            for i in range(n):
                xp[i] = s[r, i] / nrm
            _apply_one(tp, d, n, xp, wp)
            val = _dot(xp, wp, n)
            for it in range(max_iter):
                for i in range(n):
                    xp[i] = wp[i] + shift * xp[i]
                nrm = sqrt(_dot(xp, xp, n))
                if nrm < 1e-300:
                    nrm = 1e-300
                for i in range(n):
                    xp[i] /= nrm
                _apply_one(tp, d, n, xp, wp)
                new_val = _dot(xp, wp, n)
                if fabs(new_val - val) <= tol:
                    val = new_val
                    break
                val = new_val
            if val > best:
                best = val
    return float(best)
