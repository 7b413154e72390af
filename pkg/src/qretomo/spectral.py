"""Hermitian matrices, their eigendecomposition and spectral functional calculus.

Hermitian matrices are carried as plain ``complex128`` numpy arrays.  The
space Herm(N) is treated as a *real* inner-product space with
``<A, B> = tr(A B)``.
"""
from typing import Callable, NamedTuple

import numpy as np

from . import kernels

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """An iterative kernel hit its iteration cap."""


class SpectralDomainError(ValueError):
    """A spectral function is undefined at some eigenvalue."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class EigenSystem(NamedTuple):
    """Ascending real eigenvalues and a unitary matrix of eigenvectors."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def compose(self, values=None):
        """Return ``V diag(values) V*`` (defaults to the eigenvalues)."""
        values = self.eigenvalues if values is None else np.asarray(values)
        V = self.vectors
        out = (V * values) @ V.conj().T
        return 0.5 * (out + out.conj().T)


def hermitian(a, tol=HERMITIAN_TOL):
    """Validate ``a`` as Hermitian and return its exact symmetrization.

    Raises
    ------
    ValueError
        If ``a`` is not square or ``||a - a*||_F > tol * max(1, ||a||_F)``.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    defect = np.linalg.norm(a - a.conj().T)
    scale = max(1.0, np.linalg.norm(a))
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian: ||A - A*||_F = {defect:.3e}")
    return 0.5 * (a + a.conj().T)


def eig_hermitian(a, *, basis=None):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : (N, N) array_like
        Hermitian matrix.
    basis : (N, N) ndarray, optional
        Unitary warm start, typically the eigenvectors of a nearby matrix.
        Jacobi then only has to clean up ``basis* a basis``.

    Returns
    -------
    EigenSystem
    """
    a = np.asarray(a, dtype=np.complex128)
    if basis is not None:
        work = basis.conj().T @ a @ basis
        work = 0.5 * (work + work.conj().T)
    else:
        work = a
    w, V, sweeps, off = kernels.jacobi_eigh(work, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    target = JACOBI_TOL * np.linalg.norm(work)
    if off > target:
        raise ConvergenceError(
            f"Jacobi did not converge in {sweeps} sweeps: "
            f"off-diagonal residual {off:.3e} > {target:.3e}"
        )
    if basis is not None:
        V = basis @ V
    order = np.argsort(w, kind="stable")
    return EigenSystem(w[order], np.ascontiguousarray(V[:, order]))


def apply_spectral(a, f: Callable[[np.ndarray], np.ndarray], *, eig=None):
    """Return ``f(A) = V diag(f(lambda)) V*``.

    ``f`` receives the whole eigenvalue vector.  A non-finite result at any
    eigenvalue raises :class:`SpectralDomainError`.
    """
    es = eig_hermitian(a) if eig is None else eig
    with np.errstate(all="ignore"):
        values = np.asarray(f(es.eigenvalues), dtype=np.float64)
    bad = ~np.isfinite(values)
    if np.any(bad):
        lam = es.eigenvalues[np.argmax(bad)]
        raise SpectralDomainError(
            f"spectral function undefined at eigenvalue {lam:.6g}", eigenvalue=lam
        )
    return es.compose(values)


def trace_inner(a, b):
    """Real inner product ``tr(A B)`` of two Hermitian matrices."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B
    z = np.vdot(b, a)
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    if abs(z.imag) > 1e-12 * max(scale, 1e-300) and abs(z.imag) > 1e-300:
        raise ValueError(f"trace inner product has imaginary part {z.imag:.3e}")
    return float(z.real)


def trace_norm(a):
    """Sum of absolute eigenvalues."""
    return float(np.sum(np.abs(eig_hermitian(a).eigenvalues)))


def floor_eigenvalues(a, eps):
    """Shift every eigenvalue up by ``eps``, i.e. ``A + eps I``."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    a = np.asarray(a, dtype=np.complex128)
    return a + eps * np.eye(a.shape[0])
