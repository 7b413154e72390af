"""Data-fidelity functionals on data grids: squared L2 and Kullback-Leibler.

A data grid is a real array indexed by ``(phase, outcome)``.  Values may be
``+inf`` where a point lies outside a functional's domain.
"""
import enum

import numpy as np


class FidelityKind(str, enum.Enum):
    L2 = "l2"
    KL = "kl"


def _grids(*arrays):
    out = [np.asarray(a, dtype=np.float64) for a in arrays]
    shape = out[0].shape
    for a in out[1:]:
        if a.shape != shape:
            raise ValueError(f"shape mismatch: {a.shape} vs {shape}")
    return out


def _kl_pointwise(x, y):
    """``s_KL(x, y)`` with the extended-real case table."""
    out = np.empty(np.broadcast(x, y).shape)
    inf = (x < 0) | (y < 0) | ((x > 0) & (y == 0))
    zero_obs = (x == 0) & ~inf
    regular = ~inf & ~zero_obs
    out[inf] = np.inf
    out[zero_obs] = y[zero_obs]
    xr, yr = x[regular], y[regular]
    out[regular] = yr - xr + xr * np.log(xr / yr)
    return out


def fit_value(kind, g_obs, f):
    """``S_{g_obs}(f)``: ``1/2 ||f - g_obs||^2`` or ``sum s_KL(g_obs, f)``."""
    kind = FidelityKind(kind)
    g_obs, f = _grids(g_obs, f)
    if kind is FidelityKind.L2:
        return 0.5 * float(np.sum((f - g_obs) ** 2))
    return float(np.sum(_kl_pointwise(g_obs, f)))


def fit_grad(kind, g_obs, f):
    """Gradient of ``f -> S_{g_obs}(f)``.

    For KL this is ``1 - g_obs / f`` (``1`` where ``g_obs == 0``) and needs
    ``f > 0`` wherever ``g_obs > 0``.
    """
    kind = FidelityKind(kind)
    g_obs, f = _grids(g_obs, f)
    if kind is FidelityKind.L2:
        return f - g_obs
    pos = g_obs > 0
    if np.any(f[pos] <= 0):
        raise ValueError("KL gradient undefined: f <= 0 where g_obs > 0")
    out = np.ones_like(f)
    out[pos] = 1.0 - g_obs[pos] / f[pos]
    return out


def fit_conjugate(kind, p, g_obs):
    """Convex conjugate ``S*_{g_obs}(p)`` (may be ``+inf``).

    L2: ``<p, g_obs> + 1/2 ||p||^2``.  KL: ``sum -g_obs ln(1 - p)``, finite
    only for ``p < 1`` where ``g_obs > 0`` and ``p <= 1`` where ``g_obs == 0``.
    """
    kind = FidelityKind(kind)
    p, g_obs = _grids(p, g_obs)
    if kind is FidelityKind.L2:
        return float(np.sum(p * g_obs) + 0.5 * np.sum(p * p))
    pos = g_obs > 0
    if np.any(p[pos] >= 1.0) or np.any(p[g_obs == 0] > 1.0):
        return np.inf
    if np.any(g_obs < 0):
        # s_KL(x, .) is identically +inf for x < 0
        return -np.inf
    return float(-np.sum(g_obs[pos] * np.log1p(-p[pos])))


def fit_conj_prox(kind, g_tilde, nu, g_obs):
    """Proximal map of ``nu * S*_{g_obs}``.

    The KL branch is the smaller root of
    ``p^2 - (1 + g~) p + g~ - nu g_obs = 0``; its entries are always ``< 1``.
    """
    kind = FidelityKind(kind)
    if nu <= 0:
        raise ValueError("nu must be positive")
    g_tilde, g_obs = _grids(g_tilde, g_obs)
    if kind is FidelityKind.L2:
        return (g_tilde - nu * g_obs) / (1.0 + nu)
    # ((1+g~)/2)^2 - g~ + nu g = ((1-g~)/2)^2 + nu g, free of cancellation
    rad = (0.5 * (1.0 - g_tilde)) ** 2 + nu * g_obs
    if np.any(rad < -1e-14):
        raise ValueError("negative radicand in KL dual prox; data must be >= 0")
    root = np.sqrt(np.maximum(rad, 0.0))
    half = 0.5 * (1.0 + g_tilde)
    big = half > 0
    out = np.empty_like(g_tilde)
    out[~big] = half[~big] - root[~big]
    # product of the roots is g~ - nu g; avoids cancellation when half >> 0
    out[big] = (g_tilde[big] - nu * g_obs[big]) / (half[big] + root[big])
    return out


def dual_point(kind, g_obs, f, alpha):
    """Dual candidate ``-(1/alpha) grad S_{g_obs}(f)`` used by the duality gap."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return -fit_grad(kind, g_obs, f) / alpha
