# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: CUSUM transform, bootstrap argmax loop, walk argmax.

Arithmetic mirrors the numpy fallback operation for operation: long double
partial sums on the CUSUM path, plain double accumulation on the walk path,
so the two backends agree to the last bit up to libm rounding in pow().
"""

from libc.math cimport fabs, pow, sqrt
from libc.stdint cimport int64_t

import numpy as np

BACKEND = "compiled"


cdef void _fill_weights(double[::1] w, Py_ssize_t n, double gamma) noexcept nogil:
    cdef Py_ssize_t k
    cdef double kd, nd = <double> n
    for k in range(1, n):
        kd = <double> k
        w[k - 1] = pow(nd / (kd * (nd - kd)), gamma)


def cusum_stats(x, double gamma):
    """Weighted CUSUM transform of one series; returns S(1), ..., S(n-1)."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty(n - 1, dtype=np.float64)
    weights = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double[::1] wv = weights
    cdef long double acc = 0.0
    cdef long double xbar
    cdef Py_ssize_t k
    with nogil:
        _fill_weights(wv, n, gamma)
        for k in range(n):
            acc += xv[k]
        xbar = acc / n
        acc = 0.0
        for k in range(1, n):
            acc += xv[k - 1]
            ov[k - 1] = (<double> (acc - <long double> k * xbar)) * wv[k - 1]
    return out


def bootstrap_mstars(
    residuals,
    offsets,
    Py_ssize_t block_length,
    Py_ssize_t m_hat,
    double mu1,
    double mu2,
    double gamma,
):
    """Change-point argmax for every block-bootstrap resample (rows of offsets)."""
    cdef const double[::1] res = np.ascontiguousarray(residuals, dtype=np.float64)
    cdef const int64_t[:, ::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t n = res.shape[0]
    cdef Py_ssize_t nrows = off.shape[0]
    cdef Py_ssize_t nblocks = off.shape[1]
    out = np.empty(nrows, dtype=np.int64)
    cdef int64_t[::1] ov = out
    xbuf = np.empty(n, dtype=np.float64)
    step = np.empty(n, dtype=np.float64)
    weights = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] xb = xbuf
    cdef double[::1] st = step
    cdef double[::1] wv = weights
    cdef Py_ssize_t b, l, j, k, idx, pos, best_k
    cdef long double acc, xbar
    cdef double v, best_v
    with nogil:
        _fill_weights(wv, n, gamma)
        for j in range(n):
            st[j] = mu1 if j < m_hat else mu2
        for b in range(nrows):
            idx = 0
            for l in range(nblocks):
                pos = off[b, l]
                for j in range(block_length):
                    if idx >= n:
                        break
                    xb[idx] = res[pos] + st[idx]
                    idx += 1
                    pos += 1
                    if pos >= n:
                        pos -= n
            acc = 0.0
            for k in range(n):
                acc += xb[k]
            xbar = acc / n
            acc = 0.0
            best_k = 0
            best_v = -1.0
            for k in range(1, n):
                acc += xb[k - 1]
                v = fabs((<double> (acc - <long double> k * xbar)) * wv[k - 1])
                if v > best_v:
                    best_v = v
                    best_k = k
            ov[b] = best_k
    return out


def walk_argmax(z, double step_h, double slope_neg, double slope_pos):
    """Grid argmax of two-sided drifted random walks; see the fallback docstring.

    z is (R, 2N): N normal increments per side. Returns signed grid indices,
    ties resolved toward zero with the negative side first.
    """
    cdef const double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t nrows = zv.shape[0]
    cdef Py_ssize_t half_n = zv.shape[1] // 2
    out = np.empty(nrows, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef double sq = sqrt(step_h)
    cdef Py_ssize_t r, j, best_j, best_abs
    cdef double acc, v, best_v
    with nogil:
        for r in range(nrows):
            best_v = 0.0
            best_j = 0
            best_abs = 0
            acc = 0.0
            for j in range(1, half_n + 1):
                acc += zv[r, j - 1] * sq
                v = acc - slope_neg * ((<double> j) * step_h)
                if v > best_v or (v == best_v and j < best_abs):
                    best_v = v
                    best_j = -j
                    best_abs = j
            acc = 0.0
            for j in range(1, half_n + 1):
                acc += zv[r, half_n + j - 1] * sq
                v = acc - slope_pos * ((<double> j) * step_h)
                if v > best_v or (v == best_v and j < best_abs):
                    best_v = v
                    best_j = j
                    best_abs = j
            ov[r] = best_j
    return out
