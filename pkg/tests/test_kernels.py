import os
import subprocess
import sys

import numpy as np
import pytest

from scifuse import _core_py, kernels

BACKENDS = kernels.backends()
FIG1 = dict(tr=25.0, det=80.0, sa2=16.0, sb2=1.0, sm2=1.0, ra=0.8)


def _trace_reference(w, tr, sa2, sb2, sm2, ra):
    # literal form of the cost, no algebraic rearrangement
    d = w * sa2 + (1 - w) * (sb2 + w * sm2)
    return tr / (1 - w) * (1 - w * ra * sa2 / d)


def _det_reference(w, det, n, sa2, sb2, sm2):
    s = sb2 + w * sm2
    return det * s / ((1 - w) ** (n - 1) * (w * sa2 + (1 - w) * s))


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    return BACKENDS[request.param]


def test_selected_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in BACKENDS


def test_trace_grid_matches_reference(impl):
    w = np.linspace(0.0, 0.999, 200)
    got = impl.trace_cost_grid(w, FIG1["tr"], FIG1["sa2"], FIG1["sb2"], FIG1["sm2"], FIG1["ra"])
    want = [_trace_reference(x, FIG1["tr"], 16.0, 1.0, 1.0, 0.8) for x in w]
    np.testing.assert_allclose(got, want, rtol=1e-12)
    assert got[0] == 25.0


def test_det_grid_matches_reference(impl):
    w = np.linspace(0.0, 0.999, 200)
    got = impl.det_cost_grid(w, 80.0, 2, 16.0, 1.0, 1.0)
    np.testing.assert_allclose(got, [_det_reference(x, 80.0, 2, 16.0, 1.0, 1.0) for x in w],
                               rtol=1e-12)
    assert got[0] == 80.0


@pytest.mark.parametrize("kind, scale, expected", [
    (kernels.TRACE, 25.0, 0.28236254),
    (kernels.DET, 80.0, 0.36089839),
])
def test_golden_finds_planar_minimum(impl, kind, scale, expected):
    w, v = impl.golden_cost(kind, 0.0, 1.0 - 1e-9, 1e-10, scale, 2, 16.0, 1.0, 1.0, 0.8)
    assert w == pytest.approx(expected, abs=1e-7)


def test_mse_batch_matches_explicit_formula(impl):
    gen = np.random.default_rng(3)
    n, k = 3, 7
    g = gen.standard_normal((k, 2 * n, 2 * n))
    joint = g @ np.swapaxes(g, -1, -2)
    pa_t, pb_t, cross = joint[:, :n, :n], joint[:, n:, n:], joint[:, :n, n:]
    w, u = gen.standard_normal(n), np.array([0.6, 0.0, 0.8])
    got = impl.mse_batch(pa_t.copy(), pb_t.copy(), cross.copy(), w, u, 0.3)
    kmat = np.eye(n) - np.outer(w, u)
    lmat = np.outer(w, u)
    for i in range(k):
        want = (kmat @ pa_t[i] @ kmat.T + lmat @ pb_t[i] @ lmat.T
                + kmat @ cross[i] @ lmat.T + lmat @ cross[i].T @ kmat.T + 0.3 * np.outer(w, w))
        np.testing.assert_allclose(got[i], want, rtol=1e-10, atol=1e-10)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree_on_random_inputs():
    gen = np.random.default_rng(11)
    fast, slow = BACKENDS["cython"], BACKENDS["python"]
    w = np.sort(gen.uniform(0, 1 - 1e-6, 500))
    for _ in range(20):
        sa2, sb2, sm2, ra = gen.uniform(0.1, 10, 3).tolist() + [gen.uniform(0.2, 1)]
        np.testing.assert_allclose(fast.trace_cost_grid(w, 3.0, sa2, sb2, sm2, ra),
                                   slow.trace_cost_grid(w, 3.0, sa2, sb2, sm2, ra), rtol=1e-13)
        np.testing.assert_allclose(fast.det_cost_grid(w, 2.0, 3, sa2, sb2, sm2),
                                   slow.det_cost_grid(w, 2.0, 3, sa2, sb2, sm2), rtol=1e-13)
        for kind in (0, 1):
            a = fast.golden_cost(kind, 0.0, 0.999, 1e-10, 2.0, 3, sa2, sb2, sm2, ra)
            b = slow.golden_cost(kind, 0.0, 0.999, 1e-10, 2.0, 3, sa2, sb2, sm2, ra)
            assert a[0] == pytest.approx(b[0], abs=1e-9)


def test_pure_python_module_is_importable_standalone():
    assert _core_py.TRACE == kernels.TRACE and _core_py.DET == kernels.DET


def test_env_var_forces_python_backend():
    out = subprocess.run(
        [sys.executable, "-c", "from scifuse import kernels; print(kernels.BACKEND)"],
        env={**os.environ, "SCIFUSE_PURE_PYTHON": "1"},
        capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
