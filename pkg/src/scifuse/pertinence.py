"""Cost of the SCI family and the "does fusing help at all" decision.

A fused estimate is *pertinent* when its cost ``J(P_SCI(omega*))`` is
strictly below ``J(P_A)``. For the trace and the determinant the cost
along the SCI family is convex in omega, so pertinence reduces to the sign
of its slope at ``omega = 0`` and has closed forms in the directional
statistics. Other objectives are handled numerically.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fusion import DirectionalStats, sci_covariance

FD_STEP = 1e-6
CONVEXITY_GRID = 256
CONVEXITY_TOL = 1e-8
IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True)
class CostObjective:
    """Increasing cost ``J`` on covariance matrices.

    ``kind`` is ``"trace"``, ``"det"`` or ``"custom"``; a custom objective
    carries ``custom_eval`` and the caller vouches that it is strictly
    increasing in the Loewner order.
    """
    kind: str
    custom_eval: Optional[Callable[[np.ndarray], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("trace", "det", "custom"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if (self.kind == "custom") != (self.custom_eval is not None):
            raise ValueError("custom_eval is required for, and only for, kind='custom'")

    @classmethod
    def custom(cls, fn):
        return cls("custom", fn)

    @classmethod
    def parse(cls, name):
        name = name.lower()
        if name in ("trace", "tr"):
            return TRACE
        if name in ("det", "determinant"):
            return DET
        raise ValueError(f"objective must be 'trace' or 'det', got {name!r}")

    def __call__(self, p):
        p = np.atleast_2d(p)
        if self.kind == "trace":
            return float(np.trace(p))
        if self.kind == "det":
            return float(np.linalg.det(p))
        return float(self.custom_eval(p))


TRACE = CostObjective("trace")
DET = CostObjective("det")


@dataclass(frozen=True)
class CostParams:
    """Arguments of the closed-form costs.

    ``pa`` and ``u`` are only needed for custom objectives, which must
    build the full ``P_SCI(omega)`` matrix.
    """
    stats: DirectionalStats
    sigma_m2: float
    pa: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None

    def sci_cost(self, objective):
        """``omega -> J(P_SCI(omega))`` for an arbitrary objective."""
        if self.pa is None or self.u is None:
            raise ValueError("CostParams needs pa and u to evaluate a matrix objective")

        def f(omega):
            return objective(sci_covariance(self.pa, self.stats.sigma_b2,
                                            self.sigma_m2, self.u, omega))
        return f


def _check_range(omega):
    if not 0.0 <= omega < 1.0:
        raise ValueError(f"omega must lie in [0, 1), got {omega!r}")


def cost_trace(omega, p):
    """``g(omega) = trace(P_SCI(omega))`` from the directional statistics."""
    omega = float(omega)
    _check_range(omega)
    s = p.stats
    if omega == 0.0:
        return s.trace_pa
    spread = s.sigma_b2 + omega * p.sigma_m2
    d = omega * s.sigma_a2 + (1.0 - omega) * spread
    # tr/(1-w) * (1 - w rA sa2 / D), rearranged so nothing cancels as w -> 1
    return s.trace_pa * (spread + omega * (1.0 - s.r_a) * s.sigma_a2 / (1.0 - omega)) / d


def cost_det(omega, p, det_pa=None, n=None):
    """``h(omega) = det(P_SCI(omega))`` from the directional statistics."""
    omega = float(omega)
    _check_range(omega)
    s = p.stats
    det_pa = s.det_pa if det_pa is None else det_pa
    n = s.dim if n is None else n
    if omega == 0.0:
        return det_pa
    spread = s.sigma_b2 + omega * p.sigma_m2
    d = omega * s.sigma_a2 + (1.0 - omega) * spread
    return det_pa / (1.0 - omega) ** (n - 1) * spread / d


def derivative_at_zero(objective, p):
    """Slope of ``J(P_SCI(omega))`` at ``omega = 0``.

    Closed forms for trace and determinant. With ``sigma_b2 == 0`` the
    slope is unbounded below and ``-inf`` is returned.
    """
    s = p.stats
    if s.sigma_b2 == 0.0:
        return -np.inf
    if objective.kind == "trace":
        return s.trace_pa * (1.0 - s.r_a * s.sigma_a2 / s.sigma_b2)
    if objective.kind == "det":
        return s.det_pa * (s.dim - s.sigma_a2 / s.sigma_b2)
    f = p.sci_cost(objective)
    h = FD_STEP
    # one-sided, second order: omega = 0 is the boundary of the domain
    return (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h)


def necessary_condition(stats):
    """Without ``sigma_a2 > sigma_b2`` no SCI filter helps, for any increasing cost."""
    return stats.sigma_a2 > stats.sigma_b2


def trace_pertinent(stats):
    return stats.sigma_b2 < stats.r_a * stats.sigma_a2


def det_pertinent(stats):
    return stats.sigma_b2 < stats.sigma_a2 / stats.dim


def pertinent_generic(objective, p):
    """Pertinence verdict plus a diagnostics dict, for any objective.

    Custom objectives are first checked for convexity on a grid; when that
    holds the slope at zero decides, otherwise a grid minimum is compared
    with ``J(P_A)`` and the verdict is flagged as convexity-unverified.
    """
    s = p.stats
    if not necessary_condition(s):
        return False, {"method": "necessary_condition"}
    if objective.kind == "trace":
        return trace_pertinent(s), {"method": "closed_form"}
    if objective.kind == "det":
        return det_pertinent(s), {"method": "closed_form"}

    f = p.sci_cost(objective)
    grid = np.linspace(0.0, 1.0 - 1e-3, CONVEXITY_GRID)
    vals = np.array([f(w) for w in grid])
    scale = max(float(np.max(np.abs(vals))), np.finfo(float).tiny)
    second = vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
    convex = bool(np.all(second >= -CONVEXITY_TOL * scale))
    if convex:
        slope = derivative_at_zero(objective, p)
        return bool(slope < 0.0), {"method": "derivative", "convexity_verified": True,
                                   "derivative": float(slope)}
    f0 = vals[0]
    best = float(np.min(vals))
    verdict = best < f0 - IMPROVEMENT_TOL * abs(f0)
    return bool(verdict), {"method": "grid", "convexity_verified": False,
                           "grid_min": best, "note": "convexity unverified"}
