import math

import numpy as np
import pytest

from qretomo.qre import (
    QreContext,
    convexity_region_check,
    qkl_conj_grad,
    qkl_conj_prox,
    qkl_conjugate,
    qkl_prox,
    qkl_subgrad,
    qkl_value,
)
from qretomo.spectral import SpectralDomainError, trace_inner

from conftest import herm, psd, ref_fn

OMEGA = 0.5671432904097838


@pytest.fixture
def ctx6(rng):
    return QreContext.from_prior(psd(rng, 6) + 0.1 * np.eye(6))


def test_context_requires_full_rank(rng):
    with pytest.raises(ValueError, match="positive definite"):
        QreContext.from_prior(psd(rng, 4, rank=2))
    ctx = QreContext.from_prior(np.eye(3) / 3)
    assert ctx.dim == 3 and ctx.prior_trace == pytest.approx(1)


def test_value_examples(ctx6):
    assert abs(qkl_value(ctx6.prior, ctx6)) <= 1e-12
    ctx1 = QreContext.from_prior(np.array([[1.0]]))
    assert qkl_value(np.array([[0.5]]), ctx1) == pytest.approx(0.1534264097200273, abs=1e-15)
    assert qkl_value(np.diag([1.0, -0.1]), QreContext.from_prior(np.eye(2))) == math.inf
    # rank-deficient rho is finite (0 ln 0 = 0): tr(I - rho) = 1
    assert qkl_value(np.diag([1.0, 0.0]), QreContext.from_prior(np.eye(2))) == pytest.approx(1.0)


def test_value_matches_reference(rng, ctx6):
    rho = psd(rng, 6)
    ref = np.trace(ctx6.prior - rho + ref_fn(rho, np.log) @ rho - rho @ ref_fn(ctx6.prior, np.log)).real
    assert qkl_value(rho, ctx6) == pytest.approx(ref, abs=1e-10)


def test_subgradient(rng, ctx6):
    assert np.linalg.norm(qkl_subgrad(ctx6.prior, ctx6)) <= 1e-12
    np.testing.assert_allclose(qkl_subgrad(np.e * ctx6.prior, ctx6), np.eye(6), atol=1e-12)
    rho = psd(rng, 6) + 0.05 * np.eye(6)
    g = qkl_subgrad(rho, ctx6)
    base = qkl_value(rho, ctx6)
    for _ in range(100):
        s = psd(rng, 6, rank=int(rng.integers(1, 7)))
        assert qkl_value(s, ctx6) >= base + trace_inner(g, s - rho) - 1e-10
    with pytest.raises(SpectralDomainError):
        qkl_subgrad(np.diag([1.0, 0, 1, 1, 1, 1]), ctx6)


def test_conjugate_examples():
    ctx = QreContext.from_prior(np.eye(2) / 2)
    assert qkl_conjugate(np.zeros((2, 2)), ctx) == pytest.approx(0, abs=1e-15)
    assert qkl_conjugate(np.eye(2), ctx) == pytest.approx(np.e - 1, abs=1e-14)
    np.testing.assert_allclose(qkl_conj_grad(np.zeros((2, 2)), ctx), ctx.prior, atol=1e-15)
    np.testing.assert_allclose(qkl_conj_grad(np.eye(2), ctx), np.e / 2 * np.eye(2), atol=1e-14)


def test_conjugate_gradient_fd(rng, ctx6):
    s, d = herm(rng, 6), herm(rng, 6)
    h = 1e-5
    fd = (qkl_conjugate(s + h * d, ctx6) - qkl_conjugate(s - h * d, ctx6)) / (2 * h)
    assert fd == pytest.approx(trace_inner(qkl_conj_grad(s, ctx6), d), abs=1e-6)


def test_conjugate_overflow():
    ctx = QreContext.from_prior(np.eye(2))
    with pytest.raises(OverflowError, match="700"):
        qkl_conjugate(800 * np.eye(2), ctx)


def test_prox_examples():
    ctx = QreContext.from_prior(np.eye(3))
    np.testing.assert_allclose(qkl_prox(np.zeros((3, 3)), 1.0, ctx), OMEGA * np.eye(3), atol=1e-15)
    np.testing.assert_allclose(qkl_prox(np.eye(3), 1.0, ctx), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(qkl_conj_prox(np.zeros((3, 3)), 1.0, ctx), -OMEGA * np.eye(3), atol=1e-15)
    s = np.eye(3)  # sigma + ln prior + ln tau = I
    np.testing.assert_allclose(qkl_conj_prox(s, 1.0, ctx), s - np.eye(3), atol=1e-15)
    with pytest.raises(ValueError):
        qkl_prox(np.eye(3), 0.0, ctx)


def test_prox_matches_descent_oracle(rng):
    opt = pytest.importorskip("scipy.optimize")
    n, tau = 8, 0.7
    prior = psd(rng, n) / n + 0.1 * np.eye(n)
    ctx = QreContext.from_prior(prior)
    sigma = herm(rng, n, 0.3)
    log_prior = ref_fn(prior, np.log)

    def unpack(v):
        b = (v[: n * n] + 1j * v[n * n:]).reshape(n, n)
        return b

    def fun(v):
        b = unpack(v)
        rho = b @ b.conj().T
        w, V = np.linalg.eigh(rho)
        w = np.clip(w, 1e-300, None)
        log_rho = (V * np.log(w)) @ V.conj().T
        val = (np.trace(prior - rho + rho @ log_rho - rho @ log_prior).real
               + np.linalg.norm(rho - sigma) ** 2 / (2 * tau))
        grad = 2 * (log_rho - log_prior + (rho - sigma) / tau) @ b
        return val, np.concatenate([grad.real.ravel(), grad.imag.ravel()])

    b0 = np.linalg.cholesky(prior)
    v0 = np.concatenate([b0.real.ravel(), b0.imag.ravel()])
    res = opt.minimize(fun, v0, jac=True, method="L-BFGS-B",
                       options=dict(maxiter=20000, gtol=1e-13, ftol=1e-16))
    b = unpack(res.x)
    assert np.linalg.norm(qkl_prox(sigma, tau, ctx) - b @ b.conj().T) <= 1e-6


def test_prox_warm_start(rng, ctx6):
    s = herm(rng, 6)
    p, V = qkl_prox(s, 0.5, ctx6, return_eig=True)
    p2 = qkl_prox(s + 1e-4 * herm(rng, 6), 0.5, ctx6, basis=V)
    p3 = qkl_prox(s + 0.0, 0.5, ctx6, basis=V)
    np.testing.assert_allclose(p3, p, atol=1e-13)
    assert np.linalg.norm(p2 - p) < 1e-3


def test_prox_output_positive_definite(rng, ctx6):
    for tau in (1e-3, 1.0, 1e3):
        p, V = qkl_prox(herm(rng, 6, 5.0), tau, ctx6, return_eig=True)
        # spectrum in the prox's own eigenbasis; tiny eigenvalues are below
        # what the composed matrix can resolve
        w = np.real(np.diag(V.conj().T @ p @ V))
        assert np.all(w > -1e-14 * np.linalg.norm(p))
        if tau >= 1.0:
            assert np.all(np.linalg.eigvalsh(qkl_prox(herm(rng, 6, 0.2), tau, ctx6)) > 0)


def test_convexity_region():
    assert convexity_region_check(np.diag([0.3, 0.7]), 0.5)
    assert not convexity_region_check(3 * np.eye(2), 0.5)
    assert convexity_region_check(2 * np.eye(2), 0.5)
    with pytest.raises(ValueError):
        convexity_region_check(np.eye(2), 0.0)
