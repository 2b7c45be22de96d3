"""Pure-Python/numpy implementation of the kernels in ``_core.pyx``."""
import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

TRACE = 0
DET = 1


def trace_cost_grid(omegas, tr, sa2, sb2, sm2, ra):
    w = np.asarray(omegas, dtype=float)
    s = sb2 + w * sm2
    d = w * sa2 + (1.0 - w) * s
    with np.errstate(divide="ignore", invalid="ignore"):
        extra = np.where(w == 1.0, 0.0, w * (1.0 - ra) * sa2 / (1.0 - w))
        out = tr * (s + extra) / d
    return np.where(w == 0.0, tr, out)


def det_cost_grid(omegas, det, n, sa2, sb2, sm2):
    w = np.asarray(omegas, dtype=float)
    s = sb2 + w * sm2
    d = w * sa2 + (1.0 - w) * s
    with np.errstate(divide="ignore", invalid="ignore"):
        out = det * s / ((1.0 - w) ** (n - 1) * d)
    return np.where(w == 0.0, det, out)


def _cost(kind, w, scale, n, sa2, sb2, sm2, ra):
    if w == 0.0:
        return scale
    s = sb2 + w * sm2
    d = w * sa2 + (1.0 - w) * s
    if kind == TRACE:
        if w == 1.0:
            return scale * s / d
        return scale * (s + w * (1.0 - ra) * sa2 / (1.0 - w)) / d
    return scale * s / ((1.0 - w) ** (n - 1) * d)


def golden_cost(kind, lo, hi, tol, scale, n, sa2, sb2, sm2, ra):
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = _cost(kind, c, scale, n, sa2, sb2, sm2, ra)
    fd = _cost(kind, d, scale, n, sa2, sb2, sm2, ra)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = _cost(kind, c, scale, n, sa2, sb2, sm2, ra)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = _cost(kind, d, scale, n, sa2, sb2, sm2, ra)
    w = 0.5 * (a + b)
    return w, _cost(kind, w, scale, n, sa2, sb2, sm2, ra)


def mse_batch(pa_t, pb_t, cross, w, u, sm2):
    sa = np.einsum("i,kij,j->k", u, pa_t, u)
    sb = np.einsum("i,kij,j->k", u, pb_t, u)
    gam = np.einsum("i,kij,j->k", u, cross, u)
    t = (pa_t - cross) @ u
    coef = sa + sb - 2.0 * gam + sm2
    out = (0.5 * (pa_t + np.swapaxes(pa_t, -1, -2))
           + coef[:, None, None] * np.outer(w, w)
           - t[:, :, None] * w[None, None, :]
           - w[None, :, None] * t[:, None, :])
    return out
