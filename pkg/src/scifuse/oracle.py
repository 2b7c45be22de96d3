"""Independent checks of SCI consistency.

Joint error covariances compatible with two consistent estimates are
generated by construction from contractions:

    Pa~  = Pa^1/2 Ca Ca^T Pa^1/2,   Pb~ = Pb^1/2 Cb Cb^T Pb^1/2,
    Pab~ = Pa~^1/2 K Pb~^1/2,

with ``Ca``, ``Cb``, ``K`` of spectral norm <= 1. The SCI covariance must
dominate the true MSE of the SCI gain for every such joint.

Randomness is always explicit. ``SeededRng`` derives independent PCG64
streams from ``(seed, stream index)`` through ``numpy.random.SeedSequence``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import SciFuseError
from .fusion import (
    JointCorrelation,
    directional_stats,
    sci_covariance,
    sci_gain,
)
from .psd import sqrt_psd, sqrt_psd_batch, sym

PIN_PROBABILITY = 0.2
MEMBERSHIP_TOL = 1e-9
CONSISTENCY_TOL = 1e-8
CHUNK = 256


@dataclass(frozen=True)
class SeededRng:
    seed: int
    algorithm: str = "PCG64"

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def stream(self, index=0):
        """Generator for stream ``index``; same (seed, index) -> same draws."""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(self.seed), index])))


def _generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeededRng):
        return rng.stream(0)
    return SeededRng(int(rng)).stream(0)


def _haar(gen, k, n):
    q, r = np.linalg.qr(gen.standard_normal((k, n, n)))
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def _singular_values(gen, k, n):
    s = gen.uniform(0.0, 1.0, (k, n))
    s[gen.uniform(size=(k, n)) < PIN_PROBABILITY] = 1.0
    return s


def _contraction_gram(gen, k, n):
    """``C C^T`` for random contractions C (the right factor cancels)."""
    u = _haar(gen, k, n)
    s = _singular_values(gen, k, n)
    return (u * (s**2)[:, None, :]) @ np.swapaxes(u, -1, -2)


def _contraction(gen, k, n):
    u = _haar(gen, k, n)
    v = _haar(gen, k, n)
    s = _singular_values(gen, k, n)
    return (u * s[:, None, :]) @ np.swapaxes(v, -1, -2)


def _min_eig(stack):
    return np.linalg.eigvalsh(stack)[..., 0]


def sample_admissible_joints(rng, pa, pb, count, verify=True):
    """``count`` admissible joints as stacked arrays ``(pa_t, pb_t, cross)``."""
    gen = _generator(rng)
    pa, pb = sym(pa), sym(pb)
    n = pa.shape[0]
    ra, rb = sqrt_psd(pa), sqrt_psd(pb)
    pa_t = ra @ _contraction_gram(gen, count, n) @ ra
    pb_t = rb @ _contraction_gram(gen, count, n) @ rb
    pa_t = 0.5 * (pa_t + np.swapaxes(pa_t, -1, -2))
    pb_t = 0.5 * (pb_t + np.swapaxes(pb_t, -1, -2))
    cross = sqrt_psd_batch(pa_t) @ _contraction(gen, count, n) @ sqrt_psd_batch(pb_t)
    if verify:
        _verify_membership(pa, pb, pa_t, pb_t, cross)
    return pa_t, pb_t, cross


def _verify_membership(pa, pb, pa_t, pb_t, cross):
    joint = np.concatenate([
        np.concatenate([pa_t, cross], axis=2),
        np.concatenate([np.swapaxes(cross, -1, -2), pb_t], axis=2)], axis=1)
    checks = (joint, pa[None] - pa_t, pb[None] - pb_t)
    for stack in checks:
        eig = np.linalg.eigvalsh(0.5 * (stack + np.swapaxes(stack, -1, -2)))
        scale = np.maximum(1.0, np.max(np.abs(eig), axis=-1))
        if np.any(eig[..., 0] < -MEMBERSHIP_TOL * scale):
            raise SciFuseError("sampled joint failed membership re-verification")


def sample_admissible_joint(rng, pa, pb):
    """One random joint covariance compatible with consistent ``(P_A, P_B)``."""
    pa_t, pb_t, cross = sample_admissible_joints(rng, pa, pb, 1)
    return JointCorrelation(pa_t[0], pb_t[0], cross[0])


@dataclass
class ConsistencyReport:
    samples: int
    omega: float
    worst_violation: float
    scale: float
    passed: bool
    max_trace_ratio: float
    violating_sample: Optional[JointCorrelation] = None

    def to_dict(self):
        return {
            "samples": self.samples,
            "omega": self.omega,
            "worst_violation": self.worst_violation,
            "scale": self.scale,
            "passed": self.passed,
            "max_trace_ratio": self.max_trace_ratio,
            "violating_sample": None if self.violating_sample is None else {
                "pa_tilde": self.violating_sample.pa_tilde.tolist(),
                "pb_tilde": self.violating_sample.pb_tilde.tolist(),
                "cross": self.violating_sample.cross.tolist(),
            },
        }


def _sci_pair(est_a, est_b, meas, omega):
    u = meas.direction
    stats = directional_stats(est_a.cov, est_b.cov, u)
    cov = sci_covariance(est_a.cov, stats.sigma_b2, meas.noise_var, u, omega)
    gain = sci_gain(est_a.cov, stats, meas.noise_var, u, omega)
    return cov, gain


def _chunk_worst(rng, index, count, est_a, est_b, meas, cov, gain):
    gen = rng.stream(index)
    pa_t, pb_t, cross = sample_admissible_joints(gen, est_a.cov, est_b.cov, count)
    mse = kernels.mse_batch(pa_t, pb_t, cross, gain.w, meas.direction, meas.noise_var)
    gaps = _min_eig(cov[None] - mse)
    k = int(np.argmin(gaps))
    ratio = float(np.max(np.trace(mse, axis1=1, axis2=2)) / np.trace(cov))
    return float(gaps[k]), ratio, JointCorrelation(pa_t[k], pb_t[k], cross[k])


def check_consistency(est_a, est_b, meas, omega, rng, num_samples, jobs=1):
    """Does ``P_SCI(omega)`` bound the MSE of the SCI gain over sampled joints?

    Samples are drawn in fixed chunks, chunk ``i`` from stream ``i`` of
    ``rng``, so the report depends on the seed only, not on ``jobs``.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be positive")
    if not isinstance(rng, SeededRng):
        rng = SeededRng(int(rng))
    cov, gain = _sci_pair(est_a, est_b, meas, omega)
    sizes = [min(CHUNK, num_samples - i) for i in range(0, num_samples, CHUNK)]

    def run(i):
        return _chunk_worst(rng, i, sizes[i], est_a, est_b, meas, cov, gain)

    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, range(len(sizes))))
    else:
        results = [run(i) for i in range(len(sizes))]
    worst, _, sample = min(results, key=lambda r: r[0])
    scale = float(np.max(np.abs(np.linalg.eigvalsh(cov))))
    passed = worst >= -CONSISTENCY_TOL * scale
    return ConsistencyReport(
        samples=num_samples,
        omega=float(omega),
        worst_violation=worst,
        scale=scale,
        passed=bool(passed),
        max_trace_ratio=max(r[1] for r in results),
        violating_sample=None if passed else sample,
    )


def empirical_mse(rng, joint, gain, u, sigma_m2, trials, return_stderr=False):
    """Monte-Carlo error covariance of the linear filter with gain ``w``.

    Errors ``(xa, xb)`` are drawn from ``N(0, joint)`` and the range noise
    from ``N(0, sigma_m2)`` independently; the fused error is
    ``xa - w (u^T (xa - xb) + noise)``.
    """
    gen = _generator(rng)
    n = joint.dim
    u = np.asarray(u, dtype=float)
    root = sqrt_psd(joint.block())
    x = gen.standard_normal((trials, 2 * n)) @ root
    xa, xb = x[:, :n], x[:, n:]
    noise = gen.standard_normal(trials) * np.sqrt(sigma_m2)
    err = xa - np.outer((xa - xb) @ u + noise, gain.w)
    cov = err.T @ err / trials
    if not return_stderr:
        return cov
    prods = err[:, :, None] * err[:, None, :]
    stderr = prods.std(axis=0, ddof=1) / np.sqrt(trials)
    return cov, stderr


def _contract(g):
    norm = np.linalg.norm(g, 2)
    return g / norm if norm > 1.0 else g


def _joint_from_params(params, sa, sb):
    ga, gb, gk = params
    ca, cb, k = _contract(ga), _contract(gb), _contract(gk)
    pa_t = sa @ ca @ ca.T @ sa
    pb_t = sb @ cb @ cb.T @ sb
    cross = sqrt_psd(pa_t) @ k @ sqrt_psd(pb_t)
    return JointCorrelation(pa_t, pb_t, cross)


def worst_case_search(est_a, est_b, meas, omega, rng, iterations, restarts=4, cov=None):
    """Random-restart hill climb for the joint that most violates the SCI bound.

    Returns ``(joint, value)`` with ``value`` the smallest eigenvalue of
    ``cov - MSE(joint)``; ``cov`` defaults to ``P_SCI(omega)`` and may be
    overridden to probe a deliberately wrong bound.
    """
    gen = _generator(rng)
    sci_cov, gain = _sci_pair(est_a, est_b, meas, omega)
    cov = sci_cov if cov is None else sym(cov)
    n = est_a.dim
    sa, sb = sqrt_psd(est_a.cov), sqrt_psd(est_b.cov)
    u, sm2 = meas.direction, meas.noise_var

    def score(params):
        joint = _joint_from_params(params, sa, sb)
        mse = kernels.mse_batch(joint.pa_tilde[None], joint.pb_tilde[None], joint.cross[None],
                                gain.w, u, sm2)[0]
        return float(np.linalg.eigvalsh(cov - mse)[0]), joint

    best_val, best_joint = np.inf, None
    per_restart = max(1, iterations // max(1, restarts))
    for _ in range(max(1, restarts)):
        params = [gen.standard_normal((n, n)) for _ in range(3)]
        val, joint = score(params)
        step = 0.5
        for _ in range(per_restart - 1):
            trial = [p + step * gen.standard_normal((n, n)) for p in params]
            tval, tjoint = score(trial)
            if tval < val:
                params, val, joint = trial, tval, tjoint
                step = min(step * 1.2, 2.0)
            else:
                step = max(step * 0.97, 1e-4)
        if val < best_val:
            best_val, best_joint = val, joint
    return best_joint, best_val

