"""Accelerated first-order solvers for

    min_rho  S_{g_obs}(T rho) + alpha QKL(rho, rho0)

with a duality-gap stopping rule.  The gap upper-bounds ``QKL(rho, rho_alpha)``
for the exact minimiser ``rho_alpha``.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fidelity import FidelityKind, dual_point, fit_conj_prox, fit_conjugate, fit_value
from .qre import qkl_conjugate, qkl_prox, qkl_value
from .spectral import floor_eigenvalues


@dataclass
class SolverConfig:
    """Parameters shared by :func:`fista_solve` and :func:`cp_solve`.

    ``mu`` is the strong-convexity modulus of ``QKL(., rho0)`` on density
    matrices (valid for eigenvalues up to ``1/mu``); the acceleration uses
    ``alpha * mu``, the modulus of the penalty term ``alpha * QKL``.
    ``tau0``/``nu0`` default to ``0.9 / ||T*T||`` for FISTA and
    ``||T*T||^{-1/2}`` for Chambolle-Pock.
    """

    alpha: float
    mu: float = 0.5
    gap_threshold: float = 1e-6
    max_iters: int = 2_000_000
    tau0: float | None = None
    nu0: float | None = None
    gap_check_stride: int = 50
    floor_eps: float = 1e-10

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.gap_threshold <= 0:
            raise ValueError("gap_threshold must be positive")
        if self.max_iters < 1 or self.gap_check_stride < 1:
            raise ValueError("max_iters and gap_check_stride must be >= 1")


@dataclass
class SolverReport:
    solution: np.ndarray
    iterations: int
    final_gap: float
    stop_reason: str
    wall_time: float
    objective_history: list = field(default_factory=list)
    gap_history: list = field(default_factory=list)


def duality_gap(rho, model, g_obs, ctx, kind, alpha, floor_eps=None):
    """Duality gap at ``rho`` with the dual point ``-(1/alpha) grad S(T rho)``.

    Returns ``+inf`` when ``rho`` or the dual point lies outside a conjugate's
    domain (typical in the first iterations).
    """
    return _gap_terms(rho, model, g_obs, ctx, kind, alpha, floor_eps)[0]


def _gap_terms(rho, model, g_obs, ctx, kind, alpha, floor_eps=None):
    eps = ctx.floor_eps if floor_eps is None else floor_eps
    rho_f = floor_eigenvalues(rho, eps)
    f = model.apply(rho_f)
    primal = fit_value(kind, g_obs, f) / alpha + qkl_value(rho_f, ctx)
    if not math.isfinite(primal):
        return math.inf, primal
    p = dual_point(kind, g_obs, f, alpha)
    dual_fit = fit_conjugate(kind, -alpha * p, g_obs) / alpha
    if not math.isfinite(dual_fit):
        return math.inf, primal
    try:
        dual_pen = qkl_conjugate(model.adjoint(p), ctx)
    except OverflowError:
        return math.inf, primal
    return primal + dual_fit + dual_pen, primal


def fista_momentum(t, q, tau_mu):
    """One step of the strongly convex FISTA momentum schedule.

    Returns ``(t_next, beta)``.
    """
    t_next = 0.5 * (1.0 - q * t * t + math.sqrt((1.0 - q * t) ** 2 + 4.0 * t * t))
    beta = (t - 1.0) / t_next * (1.0 + (1.0 - t_next) * tau_mu)
    return t_next, beta


def cp_step_sizes(tau, nu, mu):
    """Accelerated Chambolle-Pock update: ``(beta, tau_next, nu_next)``."""
    beta = 1.0 / math.sqrt(1.0 + 2.0 * mu * tau)
    return beta, beta * tau, nu / beta


class _GapMonitor:
    def __init__(self, model, g_obs, ctx, kind, cfg, callback):
        self.args = (model, g_obs, ctx, kind, cfg.alpha, cfg.floor_eps)
        self.cfg = cfg
        self.callback = callback
        self.gaps = []
        self.objectives = []

    def due(self, it):
        return it % self.cfg.gap_check_stride == 0 or it == self.cfg.max_iters

    def check(self, it, rho):
        gap, obj = _gap_terms(rho, *self.args)
        self.gaps.append(gap)
        self.objectives.append(obj)
        if self.callback is not None:
            self.callback(it, rho, gap)
        return gap <= self.cfg.gap_threshold

    def report(self, rho, it, stopped, t0):
        return SolverReport(
            solution=rho,
            iterations=it,
            final_gap=self.gaps[-1] if self.gaps else math.inf,
            stop_reason="gap" if stopped else "max_iters",
            wall_time=time.perf_counter() - t0,
            objective_history=self.objectives,
            gap_history=self.gaps,
        )


def fista_solve(model, g_obs, ctx, cfg, callback=None):
    """Generalised accelerated FISTA for the squared L2 data fidelity.

    Starts at the prior.  ``callback(iteration, rho, gap)`` is invoked at
    every gap check.
    """
    t0 = time.perf_counter()
    g_obs = np.asarray(g_obs, dtype=np.float64)
    L = model.norm_bound
    tau = 0.9 / L if cfg.tau0 is None else cfg.tau0
    if not 0 < tau < 1.0 / L:
        raise ValueError(f"FISTA step tau={tau:.4g} must lie in (0, 1/||T*T||) = (0, {1 / L:.4g})")
    tau_mu = tau * cfg.alpha * cfg.mu
    q = tau_mu / (1.0 + tau_mu)
    monitor = _GapMonitor(model, g_obs, ctx, FidelityKind.L2, cfg, callback)

    rho = ctx.prior.astype(np.complex128)
    rho_prev = rho
    t = 0.0
    basis = None
    stopped = False
    it = 0
    while it < cfg.max_iters:
        t, beta = fista_momentum(t, q, tau_mu)
        rho_tilde = rho + beta * (rho - rho_prev)
        sigma = rho_tilde - tau * model.adjoint(model.apply(rho_tilde) - g_obs)
        rho_prev = rho
        rho, basis = qkl_prox(sigma, cfg.alpha * tau, ctx, basis=basis, return_eig=True)
        it += 1
        if monitor.due(it):
            # fresh decomposition after each check keeps the warm-start basis unitary
            basis = None
            if monitor.check(it, rho):
                stopped = True
                break
    return monitor.report(rho, it, stopped, t0)


def cp_solve(model, g_obs, ctx, kind, cfg, callback=None):
    """Accelerated Chambolle-Pock (primal-dual hybrid gradient).

    Works for both fidelity kinds; the dual variable starts at zero and the
    primal one at the prior.
    """
    t0 = time.perf_counter()
    kind = FidelityKind(kind)
    g_obs = np.asarray(g_obs, dtype=np.float64)
    L = model.norm_bound
    tau = L**-0.5 if cfg.tau0 is None else cfg.tau0
    nu = L**-0.5 if cfg.nu0 is None else cfg.nu0
    if tau <= 0 or nu <= 0 or tau * nu * L > 1.0 + 1e-12:
        raise ValueError(f"step sizes violate tau*nu*||T*T|| <= 1 (got {tau * nu * L:.4g})")
    mu = cfg.alpha * cfg.mu
    monitor = _GapMonitor(model, g_obs, ctx, kind, cfg, callback)

    rho = ctx.prior.astype(np.complex128)
    rho_tilde = rho
    dual = np.zeros(model.data_shape)
    basis = None
    stopped = False
    it = 0
    while it < cfg.max_iters:
        dual = fit_conj_prox(kind, dual + nu * model.apply(rho_tilde), nu, g_obs)
        rho_new, basis = qkl_prox(rho - tau * model.adjoint(dual), tau * cfg.alpha, ctx,
                                  basis=basis, return_eig=True)
        beta, tau, nu = cp_step_sizes(tau, nu, mu)
        rho_tilde = rho_new + beta * (rho_new - rho)
        rho = rho_new
        it += 1
        if monitor.due(it):
            basis = None
            if monitor.check(it, rho):
                stopped = True
                break
    return monitor.report(rho, it, stopped, t0)
