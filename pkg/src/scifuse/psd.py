"""Small dense symmetric-matrix utilities.

Matrices are plain ``numpy`` arrays. Anything entering the package as a
covariance goes through :func:`sym`, which averages the matrix with its
transpose so that downstream code can rely on exact symmetry.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NotPSDError

DEFAULT_TOL = 1e-9


def sym(m):
    """Return ``(M + M^T) / 2`` as a float array (scalars become 1x1)."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.T)


def is_psd(m, tol=DEFAULT_TOL):
    """True iff the smallest eigenvalue is >= -tol * max(1, largest |eigenvalue|)."""
    eig = np.linalg.eigvalsh(sym(m))
    scale = max(1.0, float(np.max(np.abs(eig))))
    return bool(eig[0] >= -tol * scale)


def loewner_leq(a, b, tol=DEFAULT_TOL):
    """Loewner order test ``A <= B``, i.e. ``B - A`` is PSD."""
    a = sym(a)
    b = sym(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return is_psd(b - a, tol)


def sqrt_psd(m):
    """Principal square root of a PSD matrix via its eigendecomposition."""
    m = sym(m)
    if not is_psd(m, 1e-10):
        raise NotPSDError("sqrt_psd requires a positive semidefinite matrix")
    eig, vec = np.linalg.eigh(m)
    eig = np.clip(eig, 0.0, None)
    s = (vec * np.sqrt(eig)) @ vec.T
    return 0.5 * (s + s.T)


def sqrt_psd_batch(ms):
    """Square roots of a stack ``(k, n, n)`` of PSD matrices (no PSD check)."""
    eig, vec = np.linalg.eigh(ms)
    eig = np.clip(eig, 0.0, None)
    s = (vec * np.sqrt(eig)[..., None, :]) @ np.swapaxes(vec, -1, -2)
    return 0.5 * (s + np.swapaxes(s, -1, -2))


@dataclass(frozen=True)
class EllipsePolyline:
    points: np.ndarray  # shape (num_points, 2)
    center: np.ndarray


def ellipse_boundary(p, center, num_points, allow_singular=False):
    """Sample the boundary of ``{x | (x - c)^T P^-1 (x - c) <= 1}``.

    Points are ``center + P^{1/2} (cos t, sin t)`` for ``t = 2 pi k / num_points``.
    With ``allow_singular`` a degenerate P yields its (flat) image of the
    unit circle instead of raising; used for sampled MSE ellipses.
    """
    p = sym(p)
    if p.shape != (2, 2):
        raise ValueError("ellipse_boundary needs a 2x2 matrix")
    if num_points < 1:
        raise ValueError("num_points must be positive")
    eig = np.linalg.eigvalsh(p)
    if not allow_singular and eig[0] <= 1e-12 * max(1.0, abs(eig[1])):
        raise NotPSDError("ellipse_boundary needs a nonsingular PSD matrix")
    root = sqrt_psd(p)
    t = 2.0 * np.pi * np.arange(num_points) / num_points
    circle = np.stack([np.cos(t), np.sin(t)], axis=1)
    center = np.asarray(center, dtype=float).reshape(2)
    return EllipsePolyline(points=center + circle @ root.T, center=center)
