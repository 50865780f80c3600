"""Backend parity: the compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest

from ferlite.kernels import _numpy as np_backend

cy_backend = pytest.importorskip(
    "ferlite.kernels._cykernels", reason="compiled kernel extension not built")


def _conv_case(rng, dtype):
    b, cin, cout = int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 5))
    h, w = int(rng.integers(3, 11)), int(rng.integers(3, 11))
    k = int(rng.choice([1, 3, 5]))
    x = rng.standard_normal((b, cin, h, w)).astype(dtype)
    kern = rng.standard_normal((cout, cin, k, k)).astype(dtype)
    bias = rng.standard_normal(cout).astype(dtype)
    return x, kern, bias


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_conv_forward_parity(dtype):
    rng = np.random.default_rng(11)
    for _ in range(12):
        x, kern, bias = _conv_case(rng, dtype)
        got = np.asarray(cy_backend.conv2d_forward(x, kern, bias))
        want = np_backend.conv2d_forward(x, kern, bias)
        tol = 1e-5 if dtype == np.float32 else 1e-12
        assert got.dtype == want.dtype
        assert np.allclose(got, want, rtol=tol, atol=tol)


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_conv_backward_parity(dtype):
    rng = np.random.default_rng(12)
    for _ in range(10):
        x, kern, _ = _conv_case(rng, dtype)
        gy = rng.standard_normal((x.shape[0], kern.shape[0], x.shape[2], x.shape[3])).astype(dtype)
        gx_c, gw_c, gb_c = (np.asarray(a) for a in cy_backend.conv2d_backward(x, kern, gy))
        gx_n, gw_n, gb_n = np_backend.conv2d_backward(x, kern, gy)
        tol = 1e-4 if dtype == np.float32 else 1e-11
        assert np.allclose(gx_c, gx_n, rtol=tol, atol=tol)
        assert np.allclose(gw_c, gw_n, rtol=tol, atol=tol)
        assert np.allclose(gb_c, gb_n, rtol=tol, atol=tol)


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_maxpool_parity(dtype):
    rng = np.random.default_rng(13)
    for _ in range(12):
        b, c = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        h, w = 2 * int(rng.integers(1, 7)), 2 * int(rng.integers(1, 7))
        x = rng.standard_normal((b, c, h, w)).astype(dtype)
        out_c, idx_c = (np.asarray(a) for a in cy_backend.maxpool2_forward(x))
        out_n, idx_n = np_backend.maxpool2_forward(x)
        assert np.array_equal(out_c, out_n)
        assert np.array_equal(idx_c, idx_n)
        gy = rng.standard_normal(out_n.shape).astype(dtype)
        gx_c = np.asarray(cy_backend.maxpool2_backward(np.asarray(idx_c), gy))
        gx_n = np_backend.maxpool2_backward(idx_n, gy)
        assert np.array_equal(gx_c, gx_n)


def test_maxpool_tie_prefers_first():
    # equal values in a window: index 0 (row-major within the 2x2) wins
    x = np.ones((1, 1, 2, 2), dtype=np.float32)
    for backend in (np_backend, cy_backend):
        out, idx = backend.maxpool2_forward(x)
        assert np.asarray(out)[0, 0, 0, 0] == 1.0
        assert np.asarray(idx)[0, 0, 0, 0] == 0


def test_backend_env_selection(monkeypatch):
    import importlib

    import ferlite.kernels as pkg

    monkeypatch.setenv("FERLITE_KERNELS", "numpy")
    reloaded = importlib.reload(pkg)
    assert reloaded.BACKEND == "numpy"
    monkeypatch.setenv("FERLITE_KERNELS", "cython")
    reloaded = importlib.reload(pkg)
    assert reloaded.BACKEND == "cython"
    monkeypatch.delenv("FERLITE_KERNELS")
    importlib.reload(pkg)
