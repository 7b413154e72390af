import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qretomo.spectral import (
    ConvergenceError,
    SpectralDomainError,
    apply_spectral,
    eig_hermitian,
    floor_eigenvalues,
    hermitian,
    trace_inner,
    trace_norm,
)

from conftest import herm, psd


def test_identity_eigenvalues():
    es = eig_hermitian(np.eye(3))
    np.testing.assert_allclose(es.eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(es.compose(), np.eye(3), atol=1e-14)


def test_diagonal_sorted():
    es = eig_hermitian(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(es.eigenvalues, [-1, 2, 3])


def test_random_residual_and_unitarity(rng):
    for n in (1, 2, 8, 17):
        a = herm(rng, n)
        es = eig_hermitian(a)
        V = es.vectors
        assert np.linalg.norm(a - es.compose()) <= 1e-11 * np.linalg.norm(a)
        assert np.linalg.norm(V.conj().T @ V - np.eye(n)) <= 1e-12
        np.testing.assert_allclose(es.eigenvalues, np.linalg.eigvalsh(a), atol=1e-12)


def test_warm_start_matches_cold(rng):
    a = herm(rng, 9)
    basis = eig_hermitian(a).vectors
    b = a + 1e-3 * herm(rng, 9)
    warm = eig_hermitian(b, basis=basis)
    np.testing.assert_allclose(warm.eigenvalues, np.linalg.eigvalsh(b), atol=1e-12)
    assert np.linalg.norm(b - warm.compose()) <= 1e-11 * np.linalg.norm(b)


def test_degenerate_spectrum(rng):
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    a = (q * np.array([1, 1, 1, 2, 2, 5.0])) @ q.conj().T
    es = eig_hermitian(a)
    np.testing.assert_allclose(es.eigenvalues, [1, 1, 1, 2, 2, 5], atol=1e-12)


def test_nonconvergence_is_reported(monkeypatch, rng):
    import qretomo.spectral as sp
    monkeypatch.setattr(sp, "JACOBI_MAX_SWEEPS", 1)
    with pytest.raises(ConvergenceError, match="residual"):
        eig_hermitian(herm(rng, 12))


def test_hermitian_validation():
    with pytest.raises(ValueError, match="not Hermitian"):
        hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError, match="square"):
        hermitian(np.zeros((2, 3)))
    np.testing.assert_allclose(hermitian(np.array([[1, 1j], [-1j, 2]])).imag, [[0, 1], [-1, 0]])


def test_apply_spectral_examples(rng):
    np.testing.assert_allclose(apply_spectral(np.eye(3), np.exp), np.e * np.eye(3))
    np.testing.assert_allclose(apply_spectral(np.diag([1, np.e]), np.log), np.diag([0, 1]), atol=1e-15)
    a = psd(rng, 6)
    back = apply_spectral(apply_spectral(a, np.log), np.exp)
    assert np.linalg.norm(back - a) <= 1e-9


def test_apply_spectral_domain_error():
    with pytest.raises(SpectralDomainError) as exc:
        apply_spectral(np.diag([-1.0, 2.0]), np.log)
    assert exc.value.eigenvalue == -1.0


def test_trace_inner(rng):
    assert trace_inner(np.eye(2), np.eye(2)) == 2
    assert trace_inner(np.diag([1, 2]), np.diag([3, 4])) == 11
    a, b = herm(rng, 5), herm(rng, 5)
    assert abs(trace_inner(a, b) - np.sum(a * b.conj()).real) <= 1e-12
    assert abs(trace_inner(a, b) - np.trace(a @ b).real) <= 1e-12
    with pytest.raises(ValueError, match="mismatch"):
        trace_inner(np.eye(2), np.eye(3))


def test_trace_norm(rng):
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2)
    assert trace_norm(psd(rng, 4, trace=1.0)) == pytest.approx(1, abs=1e-12)
    a = herm(rng, 6)
    assert abs(trace_norm(a) - np.abs(np.linalg.eigvalsh(a)).sum()) <= 1e-10


def test_floor_eigenvalues():
    a = np.diag([-1e-12, 0.5])
    np.testing.assert_array_equal(floor_eigenvalues(a, 0), a)
    np.testing.assert_allclose(floor_eigenvalues(np.zeros((2, 2)), 1e-10), 1e-10 * np.eye(2))
    f = floor_eigenvalues(a, 1e-10)
    np.testing.assert_allclose(np.diag(f).real, [9.9e-11, 0.5 + 1e-10], rtol=1e-12)
    with pytest.raises(ValueError):
        floor_eigenvalues(a, -1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_property_decomposition(n, seed, scale):
    a = herm(np.random.default_rng(seed), n, scale)
    es = eig_hermitian(a)
    assert np.all(np.diff(es.eigenvalues) >= 0)
    assert np.linalg.norm(a - es.compose()) <= 1e-11 * np.linalg.norm(a)
