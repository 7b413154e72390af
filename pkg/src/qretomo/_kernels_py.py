"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``.

The Jacobi sweep here uses a round-robin ordering so that each round rotates
``n // 2`` disjoint index pairs at once with array operations; the compiled
kernel uses the plain row-cyclic order.  Both converge to the same tolerance.
"""
import numpy as np


def _round_robin(n):
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs], dtype=np.intp),
                       np.array([q for _, q in pairs], dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _offdiag_norm(a):
    return np.sqrt(2.0 * np.sum(np.abs(a[np.triu_indices(a.shape[0], 1)]) ** 2))


def jacobi_eigh(a_in, tol=1e-14, max_sweeps=100):
    """Return ``(eigenvalues, vectors, sweeps, off_norm)``; unsorted."""
    a = np.array(a_in, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    target = tol * np.linalg.norm(a)
    skip = target / max(n, 1)
    rounds = _round_robin(n) if n > 1 else []
    sweep = 0
    off = _offdiag_norm(a)
    while off > target and sweep < max_sweeps:
        for P, Q in rounds:
            apq = a[P, Q]
            r = np.abs(apq)
            active = r > skip
            if not np.any(active):
                continue
            P, Q, apq, r = P[active], Q[active], apq[active], r[active]
            app = a[P, P].real
            aqq = a[Q, Q].real
            theta = (aqq - app) / (2.0 * r)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 1.0, theta)
            t = np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0))
            t = np.where(safe == 0.0, 1.0, t)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            ph = apq / r
            sp = s * ph
            spc = s * np.conj(ph)

            cp, cq = a[:, P].copy(), a[:, Q].copy()
            a[:, P] = cp * c - cq * spc
            a[:, Q] = cp * sp + cq * c
            rp, rq = a[P, :].copy(), a[Q, :].copy()
            a[P, :] = c[:, None] * rp - sp[:, None] * rq
            a[Q, :] = spc[:, None] * rp + c[:, None] * rq
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            a[P, P] = app - t * r
            a[Q, Q] = aqq + t * r
            vp, vq = v[:, P].copy(), v[:, Q].copy()
            v[:, P] = vp * c - vq * spc
            v[:, Q] = vp * sp + vq * c
        sweep += 1
        off = _offdiag_norm(a)
    return np.diag(a).real.copy(), v, sweep, off


def g_inverse_array(t_in):
    """Solve ``ln s + s = t`` elementwise by safeguarded Newton."""
    t = np.asarray(t_in, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise ValueError(f"g_inverse needs finite input, got {t[~np.isfinite(t)].ravel()[0]}")
    flat = t.ravel()
    with np.errstate(over="ignore", under="ignore"):
        s = np.where(flat <= 0.0, np.exp(np.minimum(flat, 0.0)),
                     flat - np.log(np.maximum(flat, 1.0)) + 0.5)
    # below -40, e^{-s} rounds to 1 and s = e^t is exact in double precision
    live = flat >= -40.0
    done = ~live
    for _ in range(100):
        if np.all(done):
            break
        idx = ~done
        si = s[idx]
        s_new = si - (np.log(si) + si - flat[idx]) * si / (1.0 + si)
        bad = ~(s_new > 0.0) | ~np.isfinite(s_new)
        conv = ~bad & (np.abs(s_new - si) <= 1e-15 * si)
        s[idx] = np.where(bad, si, s_new)
        sub = np.flatnonzero(idx)
        done[sub[conv | bad]] = True
    with np.errstate(divide="ignore"):
        resid = np.abs(np.log(s) + s - flat)
    fail = live & ~(resid <= 1e-13 * np.maximum(np.abs(flat), 1.0))
    for i in np.flatnonzero(fail):
        lo, hi = 1e-300, 1e300
        for _ in range(2000):
            mid = np.sqrt(lo) * np.sqrt(hi) if hi / lo > 4.0 else 0.5 * (lo + hi)
            if np.log(mid) + mid - flat[i] > 0.0:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 4e-16 * hi:
                break
        s[i] = 0.5 * (lo + hi)
    return s.reshape(t.shape)
