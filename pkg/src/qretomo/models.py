"""Discrete forward operators for PINEM and homodyne tomography.

Every model maps a Hermitian ``(N, N)`` matrix to a real data grid of shape
``(n_theta, n_outcomes)`` and provides the exact adjoint with respect to
``tr(A B)`` on the matrix side and the Euclidean product on the grid side.
"""
import math
from functools import cached_property
from typing import Protocol

import numpy as np

from .spectral import trace_inner
from .special import bessel_j_row, hermite_functions

UNITARITY_TOL = 1e-8
QUAD_TOL = 1e-10


class ForwardModel(Protocol):
    dim: int
    data_shape: tuple

    def apply(self, rho: np.ndarray) -> np.ndarray: ...

    def adjoint(self, g: np.ndarray) -> np.ndarray: ...

    @property
    def norm_bound(self) -> float: ...


def _check_rho(rho, dim):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (dim, dim):
        raise ValueError(f"expected a ({dim}, {dim}) matrix, got {rho.shape}")
    return rho


def _check_grid(g, shape):
    g = np.asarray(g, dtype=np.float64)
    if g.shape != shape:
        raise ValueError(f"expected a data grid of shape {shape}, got {g.shape}")
    return g


def _real_part(z, scale):
    if z.size and np.max(np.abs(z.imag)) > 1e-12 * max(scale, 1.0):
        raise ValueError(f"forward map produced imaginary residue {np.max(np.abs(z.imag)):.3e}")
    return np.ascontiguousarray(z.real)


class PinemModel:
    """PINEM measurements ``(T rho)(theta, k) = <e_k, U_theta rho U_theta^* e_k>``.

    ``U_theta e_l = sum_k exp(i (k - l) theta) J_{k-l}(2 g) e_k``.  Matrix
    indices run over ``l = -(N-1)/2 .. (N-1)/2``; outcomes over the widened
    window ``k = -(N-1)/2 - K .. (N-1)/2 + K`` so no probability leaks out.
    """

    def __init__(self, dim, coupling, thetas, bessel_halfwidth, blocks):
        self.dim = dim
        self.coupling = coupling
        self.thetas = thetas
        self.bessel_halfwidth = bessel_halfwidth
        self._blocks = blocks  # (n_theta, N + 2K, N)
        self._stacked = blocks.reshape(-1, dim)
        self._stacked_conj = self._stacked.conj()
        self._stacked_h = np.ascontiguousarray(self._stacked_conj.T)
        self.data_shape = blocks.shape[:2]

    @property
    def outcomes(self):
        half = (self.dim - 1) // 2 + self.bessel_halfwidth
        return np.arange(-half, half + 1)

    def apply(self, rho):
        rho = _check_rho(rho, self.dim)
        U = self._stacked
        z = np.einsum("ij,ij->i", U @ rho, self._stacked_conj)
        return _real_part(z, np.abs(rho).sum()).reshape(self.data_shape)

    def adjoint(self, g):
        g = _check_grid(g, self.data_shape)
        U = self._stacked
        out = (self._stacked_h * g.ravel()) @ U
        return 0.5 * (out + out.conj().T)

    @cached_property
    def norm_bound(self):
        return norm_estimate(self)


def pinem_build(N, g, n_theta, bessel_halfwidth=None):
    """Build the PINEM operator for an ``N x N`` state and coupling ``g``.

    Phases are ``n_theta`` equally spaced points in ``[-pi, pi)``.
    """
    if N < 1 or N % 2 == 0:
        raise ValueError("N must be odd so the index window is symmetric")
    if n_theta < 1:
        raise ValueError("n_theta must be >= 1")
    if g < 0:
        raise ValueError("coupling must be nonnegative")
    K = math.ceil(2 * g) + 20 if bessel_halfwidth is None else int(bessel_halfwidth)
    half = (N - 1) // 2
    ls = np.arange(-half, half + 1)
    ks = np.arange(-half - K, half + K + 1)
    table = bessel_j_row(2.0 * g, N - 1 + K)
    diff = ks[:, None] - ls[None, :]
    J = table[diff]
    defect = np.max(np.abs(np.sum(J**2, axis=0) - 1.0))
    if defect > UNITARITY_TOL:
        raise ValueError(
            f"truncated U_theta is not unitary (defect {defect:.2e}); increase bessel_halfwidth"
        )
    thetas = -np.pi + 2.0 * np.pi * np.arange(n_theta) / n_theta
    blocks = np.exp(1j * diff[None, :, :] * thetas[:, None, None]) * J[None, :, :]
    return PinemModel(N, float(g), thetas, K, blocks)


class HomodyneModel:
    """Binned homodyne measurements for states in the Fock basis ``0..N-1``.

    ``kernel_semi[l]`` holds ``B_mn = int_{bin l} u_m u_n dx`` (bin-integrated
    exact operator); ``kernel_basis[l]`` holds ``c_m c_n`` with
    ``c_m = h^{-1/2} int_{bin l} u_m dx`` (normalised indicator basis).
    """

    def __init__(self, dim, thetas, edges, kernel_semi, kernel_basis):
        self.dim = dim
        self.thetas = thetas
        self.edges = edges
        self.kernel_semi = kernel_semi
        self.kernel_basis = kernel_basis
        self.bin_width = float(edges[1] - edges[0])
        self.data_shape = (len(thetas), len(edges) - 1)
        n = np.arange(dim)
        # phases[t, m, n] = exp(i (n - m) theta_t)
        self._phases = np.exp(1j * (n[None, None, :] - n[None, :, None]) * thetas[:, None, None])
        self._flat = {
            "semi": kernel_semi.reshape(len(kernel_semi), -1),
            "basis": (kernel_basis[:, :, None] * kernel_basis[:, None, :]).reshape(
                len(kernel_basis), -1),
        }

    def _kernel(self, which):
        try:
            return self._flat[which]
        except KeyError:
            raise ValueError(f"unknown operator variant {which!r}; use 'semi' or 'basis'") from None

    def _apply(self, rho, which):
        rho = _check_rho(rho, self.dim)
        weighted = (rho[None] * self._phases).reshape(len(self.thetas), -1)
        z = weighted @ self._kernel(which).T
        return _real_part(z, np.abs(rho).sum())

    def apply_semi(self, rho):
        return self._apply(rho, "semi")

    def apply_basis(self, rho):
        """Basis-modified operator ``<v_l, U rho U^* v_l>``.

        With ``v_l = h^{-1/2} 1_{bin l}`` this is ``(1/h)`` times the kernel
        integrated over the square ``bin x bin``, i.e. already a bin mass of
        the same scale as :meth:`apply_semi`.
        """
        return self._apply(rho, "basis")

    def adjoint(self, g, which):
        g = _check_grid(g, self.data_shape)
        mixed = (g @ self._kernel(which)).reshape(-1, self.dim, self.dim)
        out = np.sum(mixed * self._phases.conj(), axis=0)
        return 0.5 * (out + out.conj().T)

    def operator(self, which):
        self._kernel(which)
        return HomodyneOperator(self, which)


class HomodyneOperator:
    """One variant (``semi`` or ``basis``) of a :class:`HomodyneModel`."""

    def __init__(self, model, which):
        self.model = model
        self.which = which
        self.dim = model.dim
        self.data_shape = model.data_shape

    def apply(self, rho):
        return self.model._apply(rho, self.which)

    def adjoint(self, g):
        return self.model.adjoint(g, self.which)

    @cached_property
    def norm_bound(self):
        return norm_estimate(self)


def _bin_integrals(N, edges, quad_order):
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = mid[:, None] + half[:, None] * nodes[None, :]
    w = half[:, None] * weights[None, :]
    u = hermite_functions(N - 1, x)  # (N, n_bins, q)
    B = np.einsum("mlj,nlj,lj->lmn", u, u, w)
    B = 0.5 * (B + B.transpose(0, 2, 1))
    s = np.einsum("mlj,lj->lm", u, w)
    return B, s


def homodyne_build(N, n_theta, x_min, x_max, n_bins, quad_order=40):
    """Build the binned homodyne model on ``n_bins`` equal bins of ``[x_min, x_max]``.

    Phases are ``n_theta`` equally spaced points in ``[0, pi)``.  Bin
    integrals use Gauss-Legendre quadrature of order ``quad_order`` and are
    cross-checked against twice that order.
    """
    if not x_min < x_max:
        raise ValueError("x_min must be < x_max")
    if n_bins < 1 or n_theta < 1 or N < 1:
        raise ValueError("N, n_theta and n_bins must be >= 1")
    if quad_order < 8:
        raise ValueError("quad_order must be >= 8")
    edges = np.linspace(x_min, x_max, n_bins + 1)
    B, s = _bin_integrals(N, edges, quad_order)
    B2, _ = _bin_integrals(N, edges, 2 * quad_order)
    err = np.max(np.abs(B - B2))
    if err > QUAD_TOL:
        raise ValueError(f"quadrature not converged (doubling changes B by {err:.2e})")
    if np.max(np.einsum("lmm->m", B)) > 1.0 + 1e-8:
        raise ValueError("bin overlaps exceed the total mass of a Hermite function")
    h = (x_max - x_min) / n_bins
    thetas = np.pi * np.arange(n_theta) / n_theta
    return HomodyneModel(N, thetas, edges, B, s / math.sqrt(h))


def norm_estimate(model, iters=100, seed=0):
    """Upper estimate of ``||T* T||`` by power iteration, inflated by 5 %."""
    if iters < 20:
        raise ValueError("norm_estimate needs at least 20 iterations")
    rng = np.random.default_rng(seed)
    n = model.dim
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    x = x + x.conj().T
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = model.adjoint(model.apply(x))
        lam = trace_inner(x, y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
    return 1.05 * lam
