# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic Jacobi for complex Hermitian matrices and the
vectorised inverse of ``t -> ln t + t``.

Both functions mirror :mod:`qretomo._kernels_py` exactly in signature and
semantics; :mod:`qretomo.kernels` picks whichever is importable.
"""
import numpy as np

from libc.math cimport sqrt, fabs, hypot, log, exp, isfinite


cdef inline double _offdiag_norm(double[:, ::1] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t p, q
    cdef double s = 0.0, re, im
    for p in range(n - 1):
        for q in range(p + 1, n):
            re = a[p, 2 * q]
            im = a[p, 2 * q + 1]
            s += re * re + im * im
    return sqrt(2.0 * s)


cdef inline void _rotate_cols(double[:, ::1] m, Py_ssize_t n, Py_ssize_t p, Py_ssize_t q,
                              double c, double sr, double si) nogil:
    # columns (p, q) <- (c*p - conj(s)*q, s*p + c*q), s = sr + i si
    cdef Py_ssize_t k
    cdef double pr, pi, qr, qi
    for k in range(n):
        pr = m[k, 2 * p]
        pi = m[k, 2 * p + 1]
        qr = m[k, 2 * q]
        qi = m[k, 2 * q + 1]
        m[k, 2 * p] = c * pr - (sr * qr + si * qi)
        m[k, 2 * p + 1] = c * pi - (sr * qi - si * qr)
        m[k, 2 * q] = (sr * pr - si * pi) + c * qr
        m[k, 2 * q + 1] = (sr * pi + si * pr) + c * qi


def jacobi_eigh(a_in, double tol=1e-14, int max_sweeps=100):
    """Return ``(eigenvalues, vectors, sweeps, off_norm)``; unsorted."""
    a_arr = np.array(a_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef double[:, ::1] a = a_arr.view(np.float64)
    v_arr = np.eye(n, dtype=np.complex128)
    cdef double[:, ::1] v = v_arr.view(np.float64)
    cdef Py_ssize_t p, q, k
    cdef double re, im, r, app, aqq, theta, t, c, s, sr, si, pr, pi, qr, qi
    cdef double fro = 0.0, target, skip, off
    cdef int sweep = 0

    for p in range(n):
        for k in range(2 * n):
            fro += a[p, k] * a[p, k]
    fro = sqrt(fro)
    target = tol * fro
    skip = target / (n if n > 0 else 1)

    with nogil:
        off = _offdiag_norm(a, n)
        while off > target and sweep < max_sweeps:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    re = a[p, 2 * q]
                    im = a[p, 2 * q + 1]
                    r = hypot(re, im)
                    if r <= skip or r == 0.0:
                        continue
                    app = a[p, 2 * p]
                    aqq = a[q, 2 * q]
                    theta = (aqq - app) / (2.0 * r)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    # s * e^{i phi}, phi = arg a_pq
                    sr = s * re / r
                    si = s * im / r
                    # A <- A G
                    _rotate_cols(a, n, p, q, c, sr, si)
                    # A <- G^* A  (rows (p, q) <- (c*p - s*q, conj(s)*p + c*q))
                    for k in range(n):
                        pr = a[p, 2 * k]
                        pi = a[p, 2 * k + 1]
                        qr = a[q, 2 * k]
                        qi = a[q, 2 * k + 1]
                        a[p, 2 * k] = c * pr - (sr * qr - si * qi)
                        a[p, 2 * k + 1] = c * pi - (sr * qi + si * qr)
                        a[q, 2 * k] = (sr * pr + si * pi) + c * qr
                        a[q, 2 * k + 1] = (sr * pi - si * pr) + c * qi
                    a[p, 2 * q] = 0.0
                    a[p, 2 * q + 1] = 0.0
                    a[q, 2 * p] = 0.0
                    a[q, 2 * p + 1] = 0.0
                    a[p, 2 * p] = app - t * r
                    a[p, 2 * p + 1] = 0.0
                    a[q, 2 * q] = aqq + t * r
                    a[q, 2 * q + 1] = 0.0
                    _rotate_cols(v, n, p, q, c, sr, si)
            sweep += 1
            off = _offdiag_norm(a, n)

    w = np.empty(n, dtype=np.float64)
    for p in range(n):
        w[p] = a[p, 2 * p]
    return w, v_arr, sweep, off


def g_inverse_array(t_in):
    """Solve ``ln s + s = t`` elementwise by safeguarded Newton."""
    cdef double[::1] t = np.ascontiguousarray(t_in, dtype=np.float64).ravel()
    cdef Py_ssize_t n = t.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double ti, s, s_new, f, lo, hi, mid
    cdef int it, ok
    for i in range(n):
        ti = t[i]
        if not isfinite(ti):
            raise ValueError(f"g_inverse needs finite input, got {ti}")
        if ti < -40.0:
            # e^{-s} rounds to 1, so s = e^t exactly in double precision
            out[i] = exp(ti)
            continue
        if ti <= 0.0:
            s = exp(ti)
        else:
            s = ti - log(ti if ti > 1.0 else 1.0) + 0.5
        ok = 0
        for it in range(100):
            f = log(s) + s - ti
            s_new = s - f * s / (1.0 + s)
            if not (s_new > 0.0) or not isfinite(s_new):
                break
            if fabs(s_new - s) <= 1e-15 * s:
                s = s_new
                ok = 1
                break
            s = s_new
        if not ok and s > 0.0 and isfinite(s):
            ok = fabs(log(s) + s - ti) <= 1e-13 * (fabs(ti) if fabs(ti) > 1.0 else 1.0)
        if not ok:
            lo = 1e-300
            hi = 1e300
            for it in range(2000):
                mid = sqrt(lo) * sqrt(hi) if hi / lo > 4.0 else 0.5 * (lo + hi)
                if log(mid) + mid - ti > 0.0:
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= 4e-16 * hi:
                    break
            s = 0.5 * (lo + hi)
        out[i] = s
    return out_arr.reshape(np.shape(t_in))
