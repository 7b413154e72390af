"""Scalar special functions used by the forward models and proximal maps."""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

BESSEL_SUM_TOL = 1e-10


@dataclass(frozen=True)
class BesselTable:
    """Values ``J_n(x)`` for ``n = -K, ..., K``."""

    x: float
    K: int
    values: np.ndarray

    @property
    def orders(self):
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, n):
        n = np.asarray(n)
        if np.any(np.abs(n) > self.K):
            raise IndexError(f"order outside [-{self.K}, {self.K}]")
        return self.values[n + self.K]


def _bessel_nonneg(x, K):
    """J_0..J_K at x > 0 by Miller's backward recurrence."""
    start = K + math.ceil(1.5 * x) + 20
    start += start % 2  # even start keeps the J_0 + 2 sum J_2k bookkeeping simple
    out = np.zeros(K + 1)
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    for n in range(start, 0, -1):
        j_prev = 2.0 * n / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            out *= 1e-250
            norm *= 1e-250
        m = n - 1
        if m <= K:
            out[m] = j_cur
        if m > 0 and m % 2 == 0:
            norm += 2.0 * j_cur
    norm += j_cur  # J_0
    return out / norm


def bessel_j_row(x, K):
    """Bessel functions of the first kind ``J_n(x)`` for ``|n| <= K``.

    Parameters
    ----------
    x : float
        Argument, ``x >= 0``.
    K : int
        Largest order; must be large enough that ``sum_n J_n(x)^2`` over the
        window is within ``1e-10`` of 1.

    Returns
    -------
    BesselTable
    """
    if x < 0 or not math.isfinite(x):
        raise ValueError(f"bessel_j_row needs finite x >= 0, got {x}")
    if K < 1:
        raise ValueError("K must be >= 1")
    if x == 0.0:
        pos = np.zeros(K + 1)
        pos[0] = 1.0
    else:
        pos = _bessel_nonneg(float(x), int(K))
    sign = np.where(np.arange(K, 0, -1) % 2 == 0, 1.0, -1.0)
    values = np.concatenate([sign * pos[:0:-1], pos])
    total = float(np.sum(values**2))
    if not (1.0 - BESSEL_SUM_TOL <= total <= 1.0 + 1e-13):
        raise ValueError(
            f"K={K} too small for x={x}: sum J_n^2 = {total:.12f}; "
            f"try K >= {math.ceil(x + 10.0 * x ** (1.0 / 3.0)) + 10}"
        )
    return BesselTable(float(x), int(K), values)


def hermite_functions(m_max, x):
    """L2-normalised Hermite functions ``u_0..u_{m_max}`` at points ``x``.

    Uses the three-term recurrence in ``u_m`` directly, so neither ``m!`` nor
    ``2^m`` is ever formed.  Returns an array of shape ``(m_max + 1,) + x.shape``.
    """
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((m_max + 1,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if m_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for m in range(1, m_max):
        out[m + 1] = (x * math.sqrt(2.0 / (m + 1)) * out[m]
                      - math.sqrt(m / (m + 1)) * out[m - 1])
    return out


def hermite_fn(m, x):
    """Normalised Hermite function ``u_m(x)``, ``0 <= m <= 200``."""
    if not 0 <= m <= 200:
        raise ValueError("hermite_fn supports 0 <= m <= 200")
    return hermite_functions(m, x)[m]


def g_inverse(t):
    """Inverse of ``g(s) = ln s + s`` on ``(0, inf)``; equals ``W(e^t)``.

    Accepts scalars or arrays.  Accurate to ``1e-12 max(1, |t|)`` in the
    residual for ``|t| <= 700``.
    """
    out = kernels.g_inverse_array(np.asarray(t, dtype=np.float64))
    return float(out) if np.ndim(out) == 0 else out
