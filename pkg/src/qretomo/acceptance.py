"""Numerical acceptance checks shared by ``qretomo check`` and the test suite.

Each check returns a :class:`CheckResult`.  Reference values (matrix
logarithms and exponentials) come from ``numpy.linalg.eigh``, which is
independent of the package's own Jacobi eigensolver.
"""
import math
import time
from dataclasses import dataclass

import numpy as np

from .experiments import homodyne_preset, pinem_preset, poisson_observe, run_study
from .models import homodyne_build, pinem_build
from .qre import QreContext, qkl_conj_prox, qkl_conjugate, qkl_prox, qkl_subgrad, qkl_value
from .solvers import SolverConfig, cp_solve, fista_solve
from .spectral import trace_inner, trace_norm
from .special import bessel_j_row, g_inverse, hermite_functions


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f} s)"


def random_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_psd(rng, n, rank=None, trace=None):
    k = n if rank is None else rank
    x = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = x @ x.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    if trace is not None:
        rho *= trace / np.trace(rho).real
    return rho


def _ref_fn(a, f):
    w, v = np.linalg.eigh(a)
    return (v * f(w)) @ v.conj().T


def _timed(number, name, limit=None):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            ok, detail = fn(*args, **kwargs)
            dt = time.perf_counter() - t0
            if limit is not None and dt > limit:
                ok = False
                detail += f"; runtime exceeds {limit:g} s"
            return CheckResult(number, name, bool(ok), detail, dt)
        run.number = number
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


TAUS = (0.1, 1.0, 10.0)
# ln P is only recoverable from P while cond(P) stays well below 1/eps; scale
# 0.1 keeps every prox output here below cond 1e3 for all three taus
SIGMA_SCALE = 0.1


def _prox_sweep(seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        sigma = random_hermitian(rng, 8, SIGMA_SCALE)
        prior = random_psd(rng, 8) + 0.05 * np.eye(8)
        ctx = QreContext.from_prior(prior)
        for tau in TAUS:
            yield sigma, prior, ctx, tau


@_timed(1, "prox optimality", limit=5.0)
def check_prox_optimality(seed=1):
    worst = 0.0
    for sigma, prior, ctx, tau in _prox_sweep(seed):
        P = qkl_prox(sigma, tau, ctx)
        res = (sigma - P) / tau - (_ref_fn(P, np.log) - _ref_fn(prior, np.log))
        worst = max(worst, np.linalg.norm(res))
    return worst <= 1e-9, f"max residual {worst:.2e} (tol 1e-9, 300 cases)"


@_timed(2, "Moreau identity", limit=5.0)
def check_moreau(seed=1):
    worst = 0.0
    for sigma, _, ctx, tau in _prox_sweep(seed):
        # sigma = prox_{tau f}(sigma) + tau prox_{f*/tau}(sigma/tau)
        res = sigma - qkl_prox(sigma, tau, ctx) - tau * qkl_conj_prox(sigma / tau, 1.0 / tau, ctx)
        worst = max(worst, np.linalg.norm(res))
    return worst <= 1e-9, f"max residual {worst:.2e} (tol 1e-9, 300 cases)"


@_timed(3, "Young's equality")
def check_young(seed=3):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        sigma = random_hermitian(rng, 6)
        prior = random_psd(rng, 6) + 0.05 * np.eye(6)
        ctx = QreContext.from_prior(prior)
        nu = _ref_fn(sigma + _ref_fn(prior, np.log), np.exp)
        pair = trace_inner(sigma, nu)
        err = abs(qkl_value(nu, ctx) + qkl_conjugate(sigma, ctx) - pair) / (1.0 + abs(pair))
        worst = max(worst, err)
    return worst <= 1e-8, f"max scaled defect {worst:.2e} (tol 1e-8)"


@_timed(4, "Bregman identity")
def check_bregman(seed=4):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(100):
        prior = random_psd(rng, 6) + 0.05 * np.eye(6)
        ctx = QreContext.from_prior(prior)
        rho = random_psd(rng, 6) + 0.01 * np.eye(6)
        sigma = random_psd(rng, 6, rank=6 if i % 2 else 3)
        lhs = (qkl_value(sigma, ctx) - qkl_value(rho, ctx)
               - trace_inner(qkl_subgrad(rho, ctx), sigma - rho))
        err = abs(lhs - qkl_value(sigma, QreContext.from_prior(rho)))
        worst = max(worst, err)
    return worst <= 1e-8, f"max defect {worst:.2e} (tol 1e-8, half the sigma rank-deficient)"


@_timed(5, "trace-norm and trace inequalities")
def check_inequalities(seed=5):
    rng = np.random.default_rng(seed)
    slack = 1e-10
    bad_norm = bad_trace = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        rho = random_psd(rng, n, rank=int(rng.integers(1, n + 1)), trace=rng.uniform(0.2, 3.0))
        sigma = random_psd(rng, n, trace=rng.uniform(0.2, 3.0))
        q = qkl_value(rho, QreContext.from_prior(sigma))
        bound = (2 / 3 * trace_norm(rho) + 4 / 3 * trace_norm(sigma)) * q
        bad_norm += trace_norm(rho - sigma) ** 2 > bound + slack
    for _ in range(200):
        n = int(rng.integers(2, 9))
        rho = random_psd(rng, n, rank=int(rng.integers(1, n + 1)), trace=rng.uniform(0.0, 5.0))
        prior = random_psd(rng, n, trace=rng.uniform(0.2, 3.0))
        q = qkl_value(rho, QreContext.from_prior(prior))
        bad_trace += q < np.trace(rho).real + (1 - math.e) * np.trace(prior).real - slack
    ok = bad_norm == 0 and bad_trace == 0
    return ok, f"violations: trace-norm {bad_norm}/200, trace {bad_trace}/200"


def toy_problem():
    """5x5 PINEM problem used by the solver checks."""
    N = 5
    model = pinem_build(N, 1.0, 8)
    rng = np.random.default_rng(3)
    truth = random_psd(rng, N, trace=1.0)
    g_obs, _ = poisson_observe(model.apply(truth), 1e4, seed=7)
    ctx = QreContext.from_prior(np.eye(N) / N)
    return model, g_obs, ctx, 1e-2


@_timed(6, "duality-gap bound", limit=30.0)
def check_gap_bound():
    model, g_obs, ctx, alpha = toy_problem()
    worst = -math.inf
    count = 0
    for name, solve in (
        ("fista", lambda c, cb=None: fista_solve(model, g_obs, ctx, c, cb)),
        ("cp-l2", lambda c, cb=None: cp_solve(model, g_obs, ctx, "l2", c, cb)),
    ):
        ref = solve(SolverConfig(alpha=alpha, gap_threshold=1e-10))
        if ref.stop_reason != "gap":
            return False, f"{name} reference did not reach gap 1e-10"
        ref_ctx = QreContext.from_prior(ref.solution)

        def cb(it, rho, gap):
            nonlocal worst, count
            count += 1
            worst = max(worst, qkl_value(rho, ref_ctx) - gap)

        solve(SolverConfig(alpha=alpha, gap_threshold=1e-9, gap_check_stride=1), cb)
    return worst <= 1e-9, f"max QKL(rho, ref) - gap {worst:.2e} over {count} iterates (tol 1e-9)"


@_timed(7, "FISTA vs Chambolle-Pock")
def check_solver_agreement():
    model, g_obs, ctx, alpha = toy_problem()
    cfg = SolverConfig(alpha=alpha, gap_threshold=1e-9)
    a = fista_solve(model, g_obs, ctx, cfg)
    b = cp_solve(model, g_obs, ctx, "l2", cfg)
    if a.stop_reason != "gap" or b.stop_reason != "gap":
        return False, "a solver hit max_iters"
    d = trace_norm(a.solution - b.solution)
    return d <= 1e-5, f"trace-norm distance {d:.2e} (tol 1e-5)"


@_timed(8, "adjoint pairing")
def check_adjoints(seed=8):
    rng = np.random.default_rng(seed)
    hm = homodyne_build(21, 60, -5.0, 5.0, 120)
    models = {"pinem": pinem_build(11, 1.5, 16),
              "homodyne-semi": hm.operator("semi"),
              "homodyne-basis": hm.operator("basis")}
    worst = {}
    for name, m in models.items():
        w = 0.0
        for _ in range(50):
            rho = random_hermitian(rng, m.dim)
            g = rng.standard_normal(m.data_shape)
            lhs = float(np.sum(m.apply(rho) * g))
            rhs = trace_inner(rho, m.adjoint(g))
            w = max(w, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
        worst[name] = w
    ok = max(worst.values()) <= 1e-10
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-10)"


@_timed(9, "PINEM probability conservation")
def check_conservation(seed=9):
    rng = np.random.default_rng(seed)
    m = pinem_build(41, 5.19, 100)
    worst = 0.0
    for _ in range(5):
        rho = random_psd(rng, 41, trace=rng.uniform(0.5, 2.0))
        sums = m.apply(rho).sum(axis=1)
        worst = max(worst, np.max(np.abs(sums - np.trace(rho).real)))
    return worst <= 1e-8, f"max |sum_l T rho - tr rho| {worst:.2e} (tol 1e-8)"


LADDER = (1e3, 1e5, 1e7, 1e9)


def _trend(rows):
    te = [r.trace_error for r in rows]
    strict = all(b < a for a, b in zip(te, te[1:]))
    return strict and te[-1] < 0.1 * te[0], te


@_timed(10, "convergence-study regression", limit=600.0)
def check_convergence_studies():
    pin_ok, pin = _trend(run_study(pinem_preset(n_theta=20, intensities=LADDER)))
    hom_ok, hom = _trend(run_study(homodyne_preset(n_theta=30, intensities=LADDER)))
    fmt = lambda v: "/".join(f"{x:.2e}" for x in v)  # noqa: E731
    return pin_ok and hom_ok, f"PINEM {fmt(pin)}; homodyne {fmt(hom)}"


@_timed(11, "homodyne operator-variant divergence")
def check_variant_divergence():
    top = LADDER[-1:]
    semi = run_study(homodyne_preset(intensities=top, operator_variant="semi"))[0]
    basis = run_study(homodyne_preset(intensities=top, operator_variant="basis"))[0]
    ratio = basis.trace_error / semi.trace_error
    return ratio >= 2.0, (f"trace_error basis {basis.trace_error:.3e} vs semi "
                          f"{semi.trace_error:.3e}, ratio {ratio:.2f} (need >= 2)")


@_timed(12, "special-function oracles")
def check_special():
    t = np.linspace(-700.0, 700.0, 14001)
    s = g_inverse(t)
    g_res = float(np.max(np.abs(np.log(s) + s - t)))
    b_res = 0.0
    for x in (0.1, 1.0, 2.0, 3.46, 10.38, 25.0, 60.0):
        K = math.ceil(x + 10 * x ** (1 / 3)) + 10
        v = bessel_j_row(x, K).values
        b_res = max(b_res, abs(float(v @ v) - 1.0))
    # Gauss-Hermite is exact for u_m u_n = poly * exp(-x^2) up to degree 119
    nodes, weights = np.polynomial.hermite.hermgauss(60)
    u = hermite_functions(40, nodes)
    gram = (u * (weights * np.exp(nodes**2))) @ u.T
    h_res = float(np.max(np.abs(gram - np.eye(41))))
    ok = g_res <= 1e-12 and b_res <= 1e-10 and h_res <= 1e-8
    return ok, (f"g_inverse residual {g_res:.1e}, Bessel normalisation {b_res:.1e}, "
                f"Hermite orthonormality {h_res:.1e}")


CHECKS = (
    check_prox_optimality, check_moreau, check_young, check_bregman, check_inequalities,
    check_gap_bound, check_solver_agreement, check_adjoints, check_conservation,
    check_convergence_studies, check_variant_divergence, check_special,
)
QUICK = tuple(c for c in CHECKS if c.number not in (10, 11))


def run_checks(checks=CHECKS, stream=None):
    results = []
    for check in checks:
        r = check()
        results.append(r)
        if stream is not None:
            print(r.line(), file=stream, flush=True)
    return results
