import numpy as np
import pytest

from qretomo import _kernels_py, kernels

from conftest import herm

compiled = pytest.importorskip("qretomo._kernels")


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("impl", [compiled, _kernels_py], ids=["compiled", "python"])
def test_jacobi_backends(impl, rng):
    for n in (1, 3, 8, 21):
        a = herm(rng, n)
        w, V, sweeps, off = impl.jacobi_eigh(a, 1e-14, 100)
        assert off <= 1e-14 * np.linalg.norm(a)
        np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-12)
        assert np.linalg.norm((V * w) @ V.conj().T - a) <= 1e-11 * max(1, np.linalg.norm(a))


def test_g_inverse_backends_agree():
    t = np.linspace(-750, 700, 20001)
    a = compiled.g_inverse_array(t)
    b = _kernels_py.g_inverse_array(t)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)


@pytest.mark.parametrize("impl", [compiled, _kernels_py], ids=["compiled", "python"])
def test_g_inverse_rejects_nonfinite(impl):
    with pytest.raises(ValueError):
        impl.g_inverse_array(np.array([0.0, np.nan]))


def test_pure_python_env(monkeypatch):
    import importlib
    monkeypatch.setenv("QRETOMO_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("QRETOMO_PURE_PYTHON")
        importlib.reload(kernels)
