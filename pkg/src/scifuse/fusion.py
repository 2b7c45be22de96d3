"""SCI fusion of one range measurement into an agent's estimate.

Agent A holds ``(x_A, P_A)``, agent B holds ``(x_B, P_B)``, and a range
``z = |x_A - x_B| + noise`` is linearized around the two means along
``u = (x_A - x_B) / |x_A - x_B|``. Every unbiased linear filter for A then
reads ``x_F = x_A + w (z - u^T (x_A - x_B))`` for a gain vector ``w``.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateGeometry, DegenerateInformation, NotPSDError
from .psd import is_psd, loewner_leq, sym

EPS_SEP = 1e-6


@dataclass(frozen=True)
class Estimate:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = sym(self.cov)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"mean of length {mean.size} does not match covariance {cov.shape}")
        if not is_psd(cov):
            raise NotPSDError("estimate covariance is not positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.size


@dataclass(frozen=True)
class DistanceMeasurement:
    value: float
    noise_var: float
    direction: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.direction, dtype=float))
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("measurement direction must be a unit vector")
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")
        object.__setattr__(self, "direction", u)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "noise_var", float(self.noise_var))


@dataclass(frozen=True)
class DirectionalStats:
    """Projections of the two covariances on the measured direction.

    ``r_a`` is ``(|P_A u|^2 / sigma_a2) / trace(P_A)``, the share of A's
    total variance that a correction along ``u`` can remove; it lies in
    ``(0, 1]`` and equals 1 in one dimension.
    """
    sigma_a2: float
    sigma_b2: float
    r_a: float
    trace_pa: float
    det_pa: float
    dim: int


@dataclass(frozen=True)
class JointCorrelation:
    """A hypothesized true joint error covariance ``[[Pa, Pab], [Pab^T, Pb]]``."""
    pa_tilde: np.ndarray
    pb_tilde: np.ndarray
    cross: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pa_tilde", sym(self.pa_tilde))
        object.__setattr__(self, "pb_tilde", sym(self.pb_tilde))
        object.__setattr__(self, "cross", np.atleast_2d(np.asarray(self.cross, dtype=float)))
        n = self.pa_tilde.shape[0]
        if self.pb_tilde.shape != (n, n) or self.cross.shape != (n, n):
            raise ValueError("joint correlation blocks must all be n x n")

    @property
    def dim(self):
        return self.pa_tilde.shape[0]

    def block(self):
        return np.block([[self.pa_tilde, self.cross], [self.cross.T, self.pb_tilde]])

    def is_admissible(self, pa, pb, tol=1e-9):
        """Membership in the set of joints compatible with consistent (P_A, P_B)."""
        return (is_psd(self.block(), tol)
                and loewner_leq(self.pa_tilde, pa, tol)
                and loewner_leq(self.pb_tilde, pb, tol))


@dataclass(frozen=True)
class FilterGain:
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.atleast_1d(np.asarray(self.w, dtype=float)))

    def k_matrix(self, u):
        return np.eye(self.w.size) - np.outer(self.w, u)

    def l_matrix(self, u):
        return np.outer(self.w, u)


def linearize_direction(xhat_a, xhat_b, eps_sep=EPS_SEP):
    """Unit vector from B's mean to A's mean."""
    diff = np.asarray(xhat_a, dtype=float) - np.asarray(xhat_b, dtype=float)
    dist = np.linalg.norm(diff)
    if not dist > eps_sep:
        raise DegenerateGeometry(
            f"agent means are {dist:g} apart; the range linearization needs > {eps_sep:g}")
    return diff / dist


def directional_stats(pa, pb, u):
    pa = sym(pa)
    pb = sym(pb)
    u = np.asarray(u, dtype=float)
    n = u.size
    if pa.shape != (n, n) or pb.shape != (n, n):
        raise ValueError("covariances and direction dimensions disagree")
    pau = pa @ u
    sigma_a2 = float(u @ pau)
    if not sigma_a2 > 0.0:
        raise DegenerateInformation(
            "direction lies in the null space of P_A; r_A is undefined")
    trace_pa = float(np.trace(pa))
    r_a = 1.0 if n == 1 else min(1.0, float(pau @ pau) / sigma_a2 / trace_pa)
    return DirectionalStats(
        sigma_a2=sigma_a2,
        sigma_b2=float(u @ pb @ u),
        r_a=r_a,
        trace_pa=trace_pa,
        det_pa=float(np.linalg.det(pa)),
        dim=n,
    )


def _denominator(sigma_a2, sigma_b2, sigma_m2, omega):
    return omega * sigma_a2 + (1.0 - omega) * (sigma_b2 + omega * sigma_m2)


def _check_omega(omega, n):
    if not (0.0 <= omega < 1.0 or (omega == 1.0 and n == 1)):
        raise ValueError(f"omega must lie in [0, 1), got {omega!r}")


def sci_covariance(pa, sigma_b2, sigma_m2, u, omega):
    """SCI covariance in its inverse-free form.

    ``P(w) = (P_A - w P_A u u^T P_A / D(w)) / (1 - w)`` with
    ``D(w) = w sa2 + (1 - w)(sb2 + w sm2)``. In one dimension the
    ``w -> 1`` limit is admitted.
    """
    pa = sym(pa)
    u = np.asarray(u, dtype=float)
    omega = float(omega)
    _check_omega(omega, u.size)
    if omega == 0.0:
        return pa.copy()
    pau = pa @ u
    sigma_a2 = float(u @ pau)
    d = _denominator(sigma_a2, sigma_b2, sigma_m2, omega)
    if not d > 0.0:
        raise DegenerateInformation("D(omega) vanished")
    if u.size == 1:
        return pa * (sigma_b2 + omega * sigma_m2) / d
    out = (pa - omega * np.outer(pau, pau) / d) / (1.0 - omega)
    return 0.5 * (out + out.T)


def sci_gain(pa, stats, sigma_m2, u, omega):
    """Gain ``w = omega / D(omega) * P_A u`` of the SCI filter."""
    pa = sym(pa)
    u = np.asarray(u, dtype=float)
    omega = float(omega)
    _check_omega(omega, u.size)
    if omega == 0.0:
        return FilterGain(np.zeros(u.size))
    d = _denominator(stats.sigma_a2, stats.sigma_b2, sigma_m2, omega)
    if not d > 0.0:
        raise DegenerateInformation("D(omega) vanished")
    return FilterGain(omega / d * (pa @ u))


def innovation(est_a, est_b, meas):
    return meas.value - float(meas.direction @ (est_a.mean - est_b.mean))


def apply_linear_filter(est_a, est_b, meas, gain):
    n = est_a.dim
    if est_b.dim != n or meas.direction.size != n or gain.w.size != n:
        raise ValueError("estimate, measurement and gain dimensions disagree")
    return est_a.mean + gain.w * innovation(est_a, est_b, meas)


def _projections(joint, u):
    return (float(u @ joint.pa_tilde @ u),
            float(u @ joint.pb_tilde @ u),
            float(u @ joint.cross @ u))


def mse_under_correlation(joint, gain, u, sigma_m2):
    """Error covariance of the filter with gain ``w`` if the true joint is ``joint``."""
    u = np.asarray(u, dtype=float)
    n = joint.dim
    if gain.w.size != n or u.size != n:
        raise ValueError("gain/direction dimension does not match the joint")
    out = kernels.mse_batch(joint.pa_tilde[None], joint.pb_tilde[None],
                            joint.cross[None], gain.w, u, sigma_m2)[0]
    return 0.5 * (out + out.T)


def clairvoyant_gain(joint, u, sigma_m2):
    u = np.asarray(u, dtype=float)
    sa, sb, gam = _projections(joint, u)
    denom = sa + sb - 2.0 * gam + sigma_m2
    if not denom > 0.0:
        raise DegenerateInformation("innovation variance is zero under this joint")
    return FilterGain((joint.pa_tilde - joint.cross) @ u / denom)


def clairvoyant_fusion(joint, est_a, est_b, meas):
    """Optimal linear filter when the true joint covariance is known (Kalman form)."""
    u = meas.direction
    gain = clairvoyant_gain(joint, u, meas.noise_var)
    sa, sb, gam = _projections(joint, u)
    denom = sa + sb - 2.0 * gam + meas.noise_var
    t = (joint.pa_tilde - joint.cross) @ u
    cov = joint.pa_tilde - np.outer(t, t) / denom
    return apply_linear_filter(est_a, est_b, meas, gain), 0.5 * (cov + cov.T)
