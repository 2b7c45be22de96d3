"""Optimal SCI weight ``omega* = argmin J(P_SCI(omega))``.

Trace and determinant costs are rational in omega. Their partial-fraction
forms give stationarity conditions that are a quartic (trace) and a cubic
(determinant); the real roots in (0, 1) plus the boundary are the only
candidates. Any other objective goes through a grid-seeded golden-section
search.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .errors import DegenerateDecomposition
from .fusion import (
    FilterGain,
    apply_linear_filter,
    directional_stats,
    sci_covariance,
    sci_gain,
)
from .pertinence import (
    DET,
    IMPROVEMENT_TOL,
    TRACE,
    CostParams,
    det_pertinent,
    pertinent_generic,
    trace_pertinent,
)

EPS_OMEGA = 1e-9
GOLDEN_TOL = 1e-10
COARSE_POINTS = 64
NEWTON_STEPS = 50

ANALYTIC = "analytic"
NUMERIC = "numeric"
BOUNDARY_ZERO = "boundary_zero"


def _quadratic_roots(c2, c1, c0):
    """Real roots (ascending) of ``c2 w^2 + c1 w + c0`` with positive discriminant."""
    disc = c1 * c1 - 4.0 * c2 * c0
    q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
    r1, r2 = q / c2, c0 / q
    return (r1, r2) if r1 <= r2 else (r2, r1)


@dataclass(frozen=True)
class RationalDecomposition:
    """Partial-fraction form of the trace or determinant cost.

    trace: ``g = tr (A/(w-1) + B/(w-b) + C/(w-d))`` with roots ``(a, b, c, d)``.
    det:   ``h = det (A/(w-a) + B/(w-b)) / (1-w)^(n-1)`` with roots ``(a, b)``.
    """
    kind: str
    roots: tuple
    coeffs: tuple
    scale: float
    n: int = 1

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind == "trace":
            _, b, _, d = self.roots
            ca, cb, cc = self.coeffs
            return self.scale * (ca / (w - 1.0) + cb / (w - b) + cc / (w - d))
        a, b = self.roots
        ca, cb = self.coeffs
        return self.scale * (ca / (w - a) + cb / (w - b)) / (1.0 - w) ** (self.n - 1)

    def derivative(self, w):
        if self.kind == "trace":
            _, b, _, d = self.roots
            ca, cb, cc = self.coeffs
            return -self.scale * (ca / (w - 1.0) ** 2 + cb / (w - b) ** 2 + cc / (w - d) ** 2)
        e, _ = self._det_stationary(w)
        return self.scale * e / (1.0 - w) ** self.n

    def _det_stationary(self, w):
        # h' = det * E(w) / (1-w)^n with E = F' (1-w) + (n-1) F
        a, b = self.roots
        ca, cb = self.coeffs
        f = ca / (w - a) + cb / (w - b)
        f1 = -ca / (w - a) ** 2 - cb / (w - b) ** 2
        f2 = 2.0 * ca / (w - a) ** 3 + 2.0 * cb / (w - b) ** 3
        e = f1 * (1.0 - w) + (self.n - 1) * f
        de = f2 * (1.0 - w) + (self.n - 2) * f1
        return e, de

    def stationary_polynomial(self):
        """Coefficients (ascending) of the polynomial whose roots contain the stationary points."""
        if self.kind == "trace":
            _, b, _, d = self.roots
            ca, cb, cc = self.coeffs
            sq = lambda r: npoly.polypow([-r, 1.0], 2)  # noqa: E731
            return (ca * npoly.polymul(sq(b), sq(d))
                    + cb * npoly.polymul(sq(1.0), sq(d))
                    + cc * npoly.polymul(sq(1.0), sq(b)))
        a, b = self.roots
        ca, cb = self.coeffs
        one_minus = np.array([1.0, -1.0])
        inner = npoly.polyadd(ca * npoly.polypow([-b, 1.0], 2), cb * npoly.polypow([-a, 1.0], 2))
        first = -npoly.polymul(one_minus, inner)
        lin = npoly.polyadd(ca * np.array([-b, 1.0]), cb * np.array([-a, 1.0]))
        second = (self.n - 1) * npoly.polymul(npoly.polymul([-a, 1.0], [-b, 1.0]), lin)
        return npoly.polyadd(first, second)

    def newton(self, w):
        """Polish a stationary point in place of the raw polynomial root."""
        for _ in range(NEWTON_STEPS):
            if self.kind == "trace":
                _, b, _, d = self.roots
                ca, cb, cc = self.coeffs
                g1 = -(ca / (w - 1.0) ** 2 + cb / (w - b) ** 2 + cc / (w - d) ** 2)
                g2 = 2.0 * (ca / (w - 1.0) ** 3 + cb / (w - b) ** 3 + cc / (w - d) ** 3)
            else:
                g1, g2 = self._det_stationary(w)
            if g2 == 0.0 or not np.isfinite(g2):
                break
            step = g1 / g2
            nxt = min(max(w - step, 0.5 * w), 0.5 * (w + 1.0))
            if abs(nxt - w) <= 4e-16 * max(1.0, abs(w)):
                w = nxt
                break
            w = nxt
        return w


def _require_decomposable(p):
    if not p.sigma_m2 > 0.0:
        raise DegenerateDecomposition("sigma_m2 = 0: the cost quadratics are affine")
    if not p.stats.sigma_b2 > 0.0:
        raise DegenerateDecomposition("sigma_b2 = 0: numerator and denominator share a root at 0")


def decompose_trace_rational(p):
    _require_decomposable(p)
    s = p.stats
    sa2, sb2, sm2, ra = s.sigma_a2, s.sigma_b2, p.sigma_m2, s.r_a
    b, d = _quadratic_roots(-sm2, sa2 - sb2 + sm2, sb2)
    if ra == 1.0:
        a, c = -sb2 / sm2, 1.0
    else:
        a, c = _quadratic_roots(-sm2, (1.0 - ra) * sa2 - sb2 + sm2, sb2)
    ca = -(1.0 - a) * (1.0 - c) / ((1.0 - b) * (1.0 - d))
    cb = -(b - a) * (b - c) / ((b - 1.0) * (b - d))
    cc = -(d - a) * (d - c) / ((d - 1.0) * (d - b))
    return RationalDecomposition("trace", (a, b, c, d), (ca, cb, cc), s.trace_pa, s.dim)


def decompose_det_rational(p, det_pa=None, n=None):
    _require_decomposable(p)
    s = p.stats
    det_pa = s.det_pa if det_pa is None else det_pa
    n = s.dim if n is None else n
    a, b = _quadratic_roots(-p.sigma_m2, s.sigma_a2 - s.sigma_b2 + p.sigma_m2, s.sigma_b2)
    k = s.sigma_b2 / p.sigma_m2
    ca = -(a + k) / (a - b)
    cb = -(b + k) / (b - a)
    return RationalDecomposition("det", (a, b), (ca, cb), det_pa, n)


@dataclass
class OmegaChoice:
    omega: float
    value: float
    method: str
    diagnostics: dict = field(default_factory=dict)


def _cost_fn(kind, p):
    s = p.stats
    if kind == "trace":
        return lambda w: float(kernels.trace_cost_grid(
            [w], s.trace_pa, s.sigma_a2, s.sigma_b2, p.sigma_m2, s.r_a)[0])
    return lambda w: float(kernels.det_cost_grid(
        [w], s.det_pa, s.dim, s.sigma_a2, s.sigma_b2, p.sigma_m2)[0])


def _solve_analytic(kind, p, gate):
    s = p.stats
    if not gate:
        return OmegaChoice(0.0, s.trace_pa if kind == "trace" else s.det_pa, BOUNDARY_ZERO)
    try:
        dec = decompose_trace_rational(p) if kind == "trace" else decompose_det_rational(p)
    except DegenerateDecomposition as exc:
        choice = solve_omega_numeric(_objective(kind), p)
        choice.diagnostics["analytic_declined"] = str(exc)
        return choice

    f = _cost_fn(kind, p)
    roots = npoly.polyroots(dec.stationary_polynomial())
    candidates = []
    for r in roots:
        if abs(r.imag) > 1e-6 * max(1.0, abs(r.real)):
            continue
        w = float(r.real)
        if -1e-9 < w < 1.0 + 1e-9:
            w = dec.newton(min(max(w, 1e-12), 1.0 - 1e-12))
            if 0.0 < w < 1.0:
                candidates.append(w)
    diagnostics = {"stationary_candidates": candidates, "roots": list(dec.roots)}
    best_w, best_v = 0.0, f(0.0)
    pool = list(candidates)
    if s.dim == 1:
        pool.append(1.0)
    for w in pool:
        v = f(w)
        if v < best_v:
            best_w, best_v = w, v
    if not candidates and s.dim > 1:
        # pertinent but no stationary point survived: numerics failed, go numeric
        choice = solve_omega_numeric(_objective(kind), p)
        choice.diagnostics["analytic_failed"] = "no stationary candidate in (0, 1)"
        return choice
    return OmegaChoice(best_w, best_v, ANALYTIC if best_w > 0.0 else BOUNDARY_ZERO, diagnostics)


def _objective(kind):
    return TRACE if kind == "trace" else DET


def solve_omega_trace(p):
    return _solve_analytic("trace", p, trace_pertinent(p.stats))


def solve_omega_det(p, det_pa=None, n=None):
    if det_pa is not None or n is not None:
        s = p.stats
        stats = type(s)(s.sigma_a2, s.sigma_b2, s.r_a, s.trace_pa,
                        s.det_pa if det_pa is None else det_pa, s.dim if n is None else n)
        p = CostParams(stats, p.sigma_m2, p.pa, p.u)
    return _solve_analytic("det", p, det_pertinent(p.stats))


def golden_section(f, lo, hi, tol=GOLDEN_TOL):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def solve_omega_numeric(objective, p):
    """Grid-seeded golden-section search of ``J(P_SCI(omega))`` on ``[0, 1 - 1e-9]``."""
    s = p.stats
    hi = 1.0 - EPS_OMEGA
    grid = np.linspace(0.0, hi, COARSE_POINTS)
    if objective.kind == "trace":
        vals = kernels.trace_cost_grid(grid, s.trace_pa, s.sigma_a2, s.sigma_b2, p.sigma_m2, s.r_a)
    elif objective.kind == "det":
        vals = kernels.det_cost_grid(grid, s.det_pa, s.dim, s.sigma_a2, s.sigma_b2, p.sigma_m2)
    else:
        f = p.sci_cost(objective)
        vals = np.array([f(w) for w in grid])
    i = int(np.argmin(vals))
    lo, up = grid[max(i - 1, 0)], grid[min(i + 1, COARSE_POINTS - 1)]
    if objective.kind == "custom":
        w, v = golden_section(f, lo, up)
    else:
        kind = kernels.TRACE if objective.kind == "trace" else kernels.DET
        w, v = kernels.golden_cost(kind, lo, up, GOLDEN_TOL,
                                   s.trace_pa if kind == kernels.TRACE else s.det_pa,
                                   s.dim, s.sigma_a2, s.sigma_b2, p.sigma_m2, s.r_a)
    if vals[i] < v:
        w, v = float(grid[i]), float(vals[i])
    f0 = float(vals[0])
    if not v < f0 - IMPROVEMENT_TOL * abs(f0):
        return OmegaChoice(0.0, f0, BOUNDARY_ZERO, {"coarse_index": i})
    return OmegaChoice(float(w), float(v), NUMERIC, {"coarse_index": i})


@dataclass
class SciSolution:
    omega_star: float
    gain: FilterGain
    fused_mean: np.ndarray
    fused_cov: np.ndarray
    objective_value: float
    pertinent: bool
    method: str
    diagnostics: dict = field(default_factory=dict)


def optimal_sci_filter(est_a, est_b, meas, objective):
    """Best SCI update of A's estimate with B's estimate and the range ``meas``.

    When no weight improves the objective the input estimate is returned
    untouched with ``pertinent=False``.
    """
    u = meas.direction
    stats = directional_stats(est_a.cov, est_b.cov, u)
    p = CostParams(stats, meas.noise_var, est_a.cov, u)
    j0 = objective(est_a.cov)
    if objective.kind == "trace":
        gate, gate_diag = trace_pertinent(stats), {"gate": "closed_form"}
    elif objective.kind == "det":
        gate, gate_diag = det_pertinent(stats), {"gate": "closed_form"}
    else:
        gate, gate_diag = pertinent_generic(objective, p)

    if gate:
        if objective.kind == "trace":
            choice = solve_omega_trace(p)
        elif objective.kind == "det":
            choice = solve_omega_det(p)
        else:
            choice = solve_omega_numeric(objective, p)
    else:
        choice = OmegaChoice(0.0, j0, BOUNDARY_ZERO)
    diagnostics = {**gate_diag, **choice.diagnostics}

    omega = choice.omega
    if omega > 0.0:
        cov = sci_covariance(est_a.cov, stats.sigma_b2, meas.noise_var, u, omega)
        value = objective(cov)
        if not value < j0:
            diagnostics["reverted"] = "improvement lost to rounding"
            omega = 0.0
    if omega == 0.0:
        return SciSolution(0.0, FilterGain(np.zeros(est_a.dim)), est_a.mean.copy(),
                           est_a.cov.copy(), j0, False, BOUNDARY_ZERO, diagnostics)
    gain = sci_gain(est_a.cov, stats, meas.noise_var, u, omega)
    mean = apply_linear_filter(est_a, est_b, meas, gain)
    diagnostics["innovation"] = float(meas.value - u @ (est_a.mean - est_b.mean))
    return SciSolution(omega, gain, mean, cov, value, True, choice.method, diagnostics)
