"""Quantum relative entropy ``QKL(rho, rho0)`` and its convex-analysis toolkit.

``QKL(rho, rho0) = tr(rho0 - rho + rho ln rho - rho ln rho0)`` for positive
semidefinite ``rho`` and ``+inf`` otherwise.  The prior ``rho0`` must have
full rank.  All maps below act on Herm(N) with the real inner product
``tr(A B)``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    SpectralDomainError,
    eig_hermitian,
    hermitian,
    trace_inner,
)
from .special import g_inverse

EXP_LIMIT = 700.0
PRIOR_MIN_EIG = 1e-14
DEFAULT_FLOOR = 1e-10


@dataclass(frozen=True)
class QreContext:
    """The prior ``rho0`` together with its precomputed logarithm."""

    prior: np.ndarray
    log_prior: np.ndarray = field(repr=False)
    floor_eps: float = DEFAULT_FLOOR

    @classmethod
    def from_prior(cls, prior, floor_eps=DEFAULT_FLOOR):
        prior = hermitian(prior)
        es = eig_hermitian(prior)
        if es.eigenvalues[0] < PRIOR_MIN_EIG:
            raise ValueError(
                "prior must be positive definite; smallest eigenvalue "
                f"{es.eigenvalues[0]:.3e} < {PRIOR_MIN_EIG:g}"
            )
        return cls(prior, es.compose(np.log(es.eigenvalues)), floor_eps)

    @property
    def dim(self):
        return self.prior.shape[0]

    @property
    def prior_trace(self):
        return float(np.trace(self.prior).real)


def _check_dim(a, ctx):
    if a.shape != ctx.prior.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs prior {ctx.prior.shape}")


def _xlogx(t):
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = t[pos] * np.log(t[pos])
    return out


def qkl_value(rho, ctx):
    """``QKL(rho, prior)``; ``+inf`` if ``rho`` has a clearly negative eigenvalue.

    Eigenvalues in ``(-1e-12 ||rho||_F, 0)`` are treated as rounding noise and
    clipped to zero.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    _check_dim(rho, ctx)
    lam = eig_hermitian(rho).eigenvalues
    if lam[0] < -1e-12 * np.linalg.norm(rho):
        return math.inf
    lam = np.clip(lam, 0.0, None)
    return (ctx.prior_trace - float(np.sum(lam)) + float(np.sum(_xlogx(lam)))
            - trace_inner(rho, ctx.log_prior))


def qkl_subgrad(rho, ctx):
    """The unique subgradient ``ln rho - ln prior`` at a positive definite ``rho``."""
    rho = np.asarray(rho, dtype=np.complex128)
    _check_dim(rho, ctx)
    es = eig_hermitian(rho)
    if es.eigenvalues[0] <= 0.0:
        raise SpectralDomainError(
            "subdifferential is empty: rho is singular or indefinite "
            f"(smallest eigenvalue {es.eigenvalues[0]:.3e})",
            eigenvalue=es.eigenvalues[0],
        )
    return es.compose(np.log(es.eigenvalues)) - ctx.log_prior


def _exp_shifted(sigma, ctx):
    sigma = np.asarray(sigma, dtype=np.complex128)
    _check_dim(sigma, ctx)
    es = eig_hermitian(sigma + ctx.log_prior)
    if es.eigenvalues[-1] > EXP_LIMIT:
        raise OverflowError(
            f"exp argument {es.eigenvalues[-1]:.4g} exceeds the supported range "
            f"(max eigenvalue of sigma + ln prior must be <= {EXP_LIMIT:g})"
        )
    return es


def qkl_conjugate(sigma, ctx):
    """Convex conjugate ``tr(exp(sigma + ln prior) - prior)``."""
    es = _exp_shifted(sigma, ctx)
    return float(np.sum(np.exp(es.eigenvalues))) - ctx.prior_trace


def qkl_conj_grad(sigma, ctx):
    """Gradient of the conjugate, ``exp(sigma + ln prior)``."""
    es = _exp_shifted(sigma, ctx)
    return es.compose(np.exp(es.eigenvalues))


def qkl_prox(sigma, tau, ctx, *, basis=None, return_eig=False):
    """Proximal map of ``tau * QKL(., prior)``: ``tau g^{-1}(sigma/tau + ln prior - ln tau)``.

    ``basis`` optionally warm-starts the eigensolver.  With
    ``return_eig=True`` the eigenvectors used are returned as well, so the
    caller can pass them back as the next warm start.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    sigma = np.asarray(sigma, dtype=np.complex128)
    _check_dim(sigma, ctx)
    m = sigma / tau + ctx.log_prior
    m[np.diag_indices_from(m)] -= math.log(tau)
    es = eig_hermitian(m, basis=basis)
    out = es.compose(tau * g_inverse(es.eigenvalues))
    return (out, es.vectors) if return_eig else out


def qkl_conj_prox(sigma, tau, ctx):
    """Proximal map of ``tau * QKL*``: ``sigma - g^{-1}(sigma + ln prior + ln tau)``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    sigma = np.asarray(sigma, dtype=np.complex128)
    _check_dim(sigma, ctx)
    m = sigma + ctx.log_prior
    m[np.diag_indices_from(m)] += math.log(tau)
    es = eig_hermitian(m)
    return sigma - es.compose(g_inverse(es.eigenvalues))


def convexity_region_check(rho, mu):
    """True iff every eigenvalue of ``rho`` is at most ``1/mu``.

    On that set ``QKL(., prior)`` is strongly convex with modulus ``mu``.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    return bool(eig_hermitian(rho).eigenvalues[-1] <= 1.0 / mu + 1e-12)
