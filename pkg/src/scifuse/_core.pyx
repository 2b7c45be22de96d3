# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: closed-form SCI costs, golden-section on them, batched MSE.

Mirrors ``scifuse._core_py`` function for function.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef double INV_PHI = (sqrt(5.0) - 1.0) / 2.0

TRACE = 0
DET = 1


cdef inline double _trace_cost(double w, double tr, double sa2, double sb2,
                               double sm2, double ra) nogil:
    cdef double s, d
    if w == 0.0:
        return tr
    s = sb2 + w * sm2
    d = w * sa2 + (1.0 - w) * s
    if w == 1.0:
        return tr * s / d  # only reached with ra == 1
    return tr * (s + w * (1.0 - ra) * sa2 / (1.0 - w)) / d


cdef inline double _ipow(double x, int k) nogil:
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    return r


cdef inline double _det_cost(double w, double det, int n, double sa2,
                             double sb2, double sm2) nogil:
    cdef double s, d
    if w == 0.0:
        return det
    s = sb2 + w * sm2
    d = w * sa2 + (1.0 - w) * s
    return det * s / (_ipow(1.0 - w, n - 1) * d)


cdef inline double _cost(int kind, double w, double scale, int n, double sa2,
                         double sb2, double sm2, double ra) nogil:
    if kind == 0:
        return _trace_cost(w, scale, sa2, sb2, sm2, ra)
    return _det_cost(w, scale, n, sa2, sb2, sm2)


def trace_cost_grid(double[::1] omegas, double tr, double sa2, double sb2,
                    double sm2, double ra):
    cdef Py_ssize_t i, m = omegas.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = _trace_cost(omegas[i], tr, sa2, sb2, sm2, ra)
    return out


def det_cost_grid(double[::1] omegas, double det, int n, double sa2,
                  double sb2, double sm2):
    cdef Py_ssize_t i, m = omegas.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = _det_cost(omegas[i], det, n, sa2, sb2, sm2)
    return out


def golden_cost(int kind, double lo, double hi, double tol, double scale,
                int n, double sa2, double sb2, double sm2, double ra):
    """Golden-section minimum of the trace (kind 0) or det (kind 1) cost on [lo, hi]."""
    cdef double a = lo, b = hi, c, d, fc, fd, w
    with nogil:
        c = b - INV_PHI * (b - a)
        d = a + INV_PHI * (b - a)
        fc = _cost(kind, c, scale, n, sa2, sb2, sm2, ra)
        fd = _cost(kind, d, scale, n, sa2, sb2, sm2, ra)
        while b - a > tol:
            if fc <= fd:
                b = d
                d = c
                fd = fc
                c = b - INV_PHI * (b - a)
                fc = _cost(kind, c, scale, n, sa2, sb2, sm2, ra)
            else:
                a = c
                c = d
                fc = fd
                d = a + INV_PHI * (b - a)
                fd = _cost(kind, d, scale, n, sa2, sb2, sm2, ra)
        w = 0.5 * (a + b)
    return w, _cost(kind, w, scale, n, sa2, sb2, sm2, ra)


def mse_batch(double[:, :, ::1] pa_t, double[:, :, ::1] pb_t,
              double[:, :, ::1] cross, double[::1] w, double[::1] u, double sm2):
    """MSE of the unbiased linear filter with gain ``w`` for a stack of joints."""
    cdef Py_ssize_t k, i, j, m = pa_t.shape[0], n = pa_t.shape[1]
    cdef double sa, sb, gam, coef, ti, tj
    out = np.empty((m, n, n))
    cdef double[:, :, ::1] o = out
    # t = (P_A - P_AB) u, one vector per sample
    cdef double[::1] t = np.empty(n)
    with nogil:
        for k in range(m):
            sa = 0.0
            sb = 0.0
            gam = 0.0
            for i in range(n):
                ti = 0.0
                for j in range(n):
                    sa = sa + u[i] * pa_t[k, i, j] * u[j]
                    sb = sb + u[i] * pb_t[k, i, j] * u[j]
                    gam = gam + u[i] * cross[k, i, j] * u[j]
                    ti = ti + (pa_t[k, i, j] - cross[k, i, j]) * u[j]
                t[i] = ti
            coef = sa + sb - 2.0 * gam + sm2
            for i in range(n):
                for j in range(i + 1):
                    tj = (0.5 * (pa_t[k, i, j] + pa_t[k, j, i])
                          + coef * w[i] * w[j] - t[i] * w[j] - w[i] * t[j])
                    o[k, i, j] = tj
                    o[k, j, i] = tj
    return out
