"""Backend selection for the numeric kernels.

The compiled ``_core`` extension is used when it was built; otherwise the
numpy fallback in ``_core_py`` is loaded. Setting ``SCIFUSE_PURE_PYTHON=1``
forces the fallback.
"""
import os

import numpy as np

from . import _core_py

if os.environ.get("SCIFUSE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _core_py
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _core_py

BACKEND = "cython" if _impl is not _core_py else "python"

TRACE = 0
DET = 1

golden_cost = _impl.golden_cost


def _f64(a):
    return np.ascontiguousarray(a, dtype=float)


def trace_cost_grid(omegas, tr, sa2, sb2, sm2, ra):
    return _impl.trace_cost_grid(_f64(omegas), tr, sa2, sb2, sm2, ra)


def det_cost_grid(omegas, det, n, sa2, sb2, sm2):
    return _impl.det_cost_grid(_f64(omegas), det, int(n), sa2, sb2, sm2)


def mse_batch(pa_t, pb_t, cross, w, u, sm2):
    return _impl.mse_batch(_f64(pa_t), _f64(pb_t), _f64(cross), _f64(w), _f64(u), sm2)


def backends():
    """All importable kernel modules keyed by name (used by tests and benchmarks)."""
    found = {"python": _core_py}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        found["cython"] = _core
    return found
