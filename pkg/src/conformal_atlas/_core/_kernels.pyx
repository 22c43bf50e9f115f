# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the edge kernels; same signatures as ``_kernels_py``."""
import numpy as np
from libc.math cimport sqrt


def edge_laplacian(const long[::1] u, const long[::1] v, const double[::1] w, f):
    f = np.ascontiguousarray(f, dtype=np.float64)
    if f.ndim == 1:
        return _lap1(u, v, w, f)
    return _lap2(u, v, w, f)


cdef _lap1(const long[::1] u, const long[::1] v, const double[::1] w, const double[::1] f):
    cdef Py_ssize_t e, n = f.shape[0], m = u.shape[0]
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef double d
    for e in range(m):
        d = w[e] * (f[u[e]] - f[v[e]])
        o[u[e]] += d
        o[v[e]] -= d
    return out


cdef _lap2(const long[::1] u, const long[::1] v, const double[::1] w, const double[:, ::1] f):
    cdef Py_ssize_t e, k, n = f.shape[0], c = f.shape[1], m = u.shape[0]
    out = np.zeros((n, c))
    cdef double[:, ::1] o = out
    cdef double d
    for e in range(m):
        for k in range(c):
            d = w[e] * (f[u[e], k] - f[v[e], k])
            o[u[e], k] += d
            o[v[e], k] -= d
    return out


def edge_divergence(const long[::1] u, const long[::1] v, const double[::1] w,
                    const double[::1] x, Py_ssize_t n):
    cdef Py_ssize_t e, m = u.shape[0]
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef double d
    for e in range(m):
        d = w[e] * x[e]
        o[u[e]] += d
        o[v[e]] -= d
    return out


def sphere_step(double[:, ::1] h, const double[:, ::1] lap, double dt):
    cdef Py_ssize_t i, n = h.shape[0]
    cdef double r, a, b, c, nrm
    for i in range(n):
        r = lap[i, 0] * h[i, 0] + lap[i, 1] * h[i, 1] + lap[i, 2] * h[i, 2]
        a = h[i, 0] - dt * (lap[i, 0] - r * h[i, 0])
        b = h[i, 1] - dt * (lap[i, 1] - r * h[i, 1])
        c = h[i, 2] - dt * (lap[i, 2] - r * h[i, 2])
        nrm = sqrt(a * a + b * b + c * c)
        h[i, 0] = a / nrm
        h[i, 1] = b / nrm
        h[i, 2] = c / nrm
    return np.asarray(h)
