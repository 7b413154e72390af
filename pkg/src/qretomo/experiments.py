"""Ground-truth states, Poisson data and the alpha = alpha0 sqrt(delta) sweep."""
import csv
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .fidelity import FidelityKind, fit_value
from .models import homodyne_build, pinem_build
from .qre import QreContext, qkl_value
from .solvers import SolverConfig, cp_solve, fista_solve
from .spectral import eig_hermitian, floor_eigenvalues, trace_norm
from .special import bessel_j_row

CAT_MIN_RETAINED = 0.999
PINEM_MAX_LOSS = 1e-6


def make_cat_state(a, N):
    """Even cat state ``|a> + |-a>`` truncated to Fock levels ``0..N-1``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    n = np.arange(N)
    if a == 0:
        psi = (n == 0).astype(np.float64)
        return np.outer(psi, psi).astype(np.complex128)
    # coherent coefficients exp(-a^2/2) a^n / sqrt(n!) in log space
    log_mag = -0.5 * a * a + n * math.log(abs(a)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    sign = np.sign(a) ** n
    psi = np.exp(log_mag) * sign * (1.0 + (-1.0) ** n)
    full = 2.0 + 2.0 * math.exp(-2.0 * a * a)
    retained = float(psi @ psi) / full
    if retained < CAT_MIN_RETAINED:
        raise ValueError(
            f"Fock truncation N={N} keeps only {retained:.4f} of the cat state norm; increase N"
        )
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi).astype(np.complex128)


def make_pinem_state(g_pump, N, jitter_sigma=0.1, jitter_samples=50, seed=0):
    """Phase-jittered mixture of pump states ``psi_k = exp(i k phi) J_k(2 g_pump)``."""
    if N < 1 or N % 2 == 0:
        raise ValueError("N must be odd")
    if jitter_samples < 1:
        raise ValueError("jitter_samples must be >= 1")
    half = (N - 1) // 2
    k = np.arange(-half, half + 1)
    x = 2.0 * g_pump
    table = bessel_j_row(x, max(half, math.ceil(x + 10.0 * x ** (1 / 3)) + 10))
    amp = table[k]
    loss = 1.0 - float(amp @ amp)
    if loss > PINEM_MAX_LOSS:
        raise ValueError(f"window of size N={N} loses {loss:.2e} of the pump state; increase N")
    rng = np.random.default_rng(seed)
    phis = rng.normal(0.0, jitter_sigma, jitter_samples) if jitter_sigma > 0 else np.zeros(jitter_samples)
    psis = np.exp(1j * phis[:, None] * k[None, :]) * amp[None, :]
    rho = psis.T @ psis.conj() / jitter_samples
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def row_generator(seed, row):
    """Independent counter-based stream for one study row."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, row])))


def poisson_observe(g_exact, intensity, seed, kind=FidelityKind.L2, row=0):
    """Scaled Poisson sample ``Poisson(I g) / I`` and its noise level ``delta``."""
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    g_exact = np.asarray(g_exact, dtype=np.float64)
    if np.any(g_exact < -1e-10):
        raise ValueError("exact data must be nonnegative")
    g_exact = np.clip(g_exact, 0.0, None)
    counts = row_generator(seed, row).poisson(intensity * g_exact)
    g_obs = counts / intensity
    return g_obs, fit_value(kind, g_obs, g_exact)


@dataclass
class ExperimentConfig:
    experiment: str = "pinem"
    fidelity: FidelityKind = FidelityKind.L2
    operator_variant: str = "semi"
    dim: int = 41
    n_theta: int = 100
    coupling: float | None = None  # defaults to 3 g_pump
    g_pump: float = 1.73
    cat_amplitude: float = 3.0
    x_min: float = -5.0
    x_max: float = 5.0
    n_bins: int = 120
    jitter_sigma: float = 0.1
    jitter_samples: int = 50
    intensities: tuple = tuple(np.logspace(2, 10, 9))
    alpha0: float | None = None  # 1.0 for L2, 0.1 for KL
    mu: float = 0.5
    seed: int = 0
    gap_threshold: float = 1e-6
    max_iters: int = 2_000_000
    output_dir: str = "."

    def __post_init__(self):
        self.fidelity = FidelityKind(self.fidelity)
        if self.experiment not in ("pinem", "homodyne"):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.operator_variant not in ("semi", "basis"):
            raise ValueError(f"unknown operator variant {self.operator_variant!r}")
        self.intensities = tuple(float(x) for x in self.intensities)
        if not self.intensities or min(self.intensities) <= 0:
            raise ValueError("intensities must be positive")
        if any(b <= a for a, b in zip(self.intensities, self.intensities[1:])):
            raise ValueError("intensities must be strictly increasing")
        if self.jitter_samples < 1:
            raise ValueError("jitter_samples must be >= 1")

    @property
    def alpha0_value(self):
        if self.alpha0 is not None:
            return self.alpha0
        return 1.0 if self.fidelity is FidelityKind.L2 else 0.1

    def coerce(self, key, text):
        """Parse ``text`` into the type of field ``key``."""
        names = {f.name for f in fields(self)}
        if key not in names:
            raise KeyError(f"unknown config key {key!r}")
        if key in ("experiment", "operator_variant", "output_dir"):
            return text
        if key == "fidelity":
            return FidelityKind(text.lower())
        if key == "intensities":
            return tuple(float(x) for x in text.replace(",", " ").split())
        if key in ("dim", "n_theta", "n_bins", "jitter_samples", "seed", "max_iters"):
            return int(float(text)) if "e" in text.lower() else int(text)
        if key in ("coupling", "alpha0") and text.lower() in ("", "none", "default"):
            return None
        return float(text)


def pinem_preset(**overrides):
    cfg = ExperimentConfig(experiment="pinem", dim=41, n_theta=100, g_pump=1.73)
    if FidelityKind(overrides.get("fidelity", "l2")) is FidelityKind.KL:
        overrides.setdefault("gap_threshold", 1e-5)
    return replace(cfg, **overrides)


def homodyne_preset(**overrides):
    cfg = ExperimentConfig(experiment="homodyne", dim=21, n_theta=60, cat_amplitude=3.0,
                           x_min=-5.0, x_max=5.0, n_bins=120)
    if FidelityKind(overrides.get("fidelity", "l2")) is FidelityKind.KL:
        overrides.setdefault("gap_threshold", 1e-5)
    return replace(cfg, **overrides)


@dataclass
class Setup:
    """Truth, exact data and the operators for one experiment configuration."""

    truth: np.ndarray
    data_model: object
    recon_model: object
    ctx: QreContext
    truth_ctx: QreContext = field(repr=False)

    @property
    def exact_data(self):
        return self.data_model.apply(self.truth)


def build_setup(cfg):
    if cfg.experiment == "pinem":
        truth = make_pinem_state(cfg.g_pump, cfg.dim, cfg.jitter_sigma, cfg.jitter_samples, cfg.seed)
        coupling = 3.0 * cfg.g_pump if cfg.coupling is None else cfg.coupling
        model = pinem_build(cfg.dim, coupling, cfg.n_theta)
        data_model = recon_model = model
    else:
        truth = make_cat_state(cfg.cat_amplitude, cfg.dim)
        hm = homodyne_build(cfg.dim, cfg.n_theta, cfg.x_min, cfg.x_max, cfg.n_bins)
        data_model = hm.operator("semi")
        recon_model = hm.operator(cfg.operator_variant)
    ctx = QreContext.from_prior(np.eye(cfg.dim) / cfg.dim)
    # QKL(., truth) needs ln(truth); pure states are floored to full rank
    truth_ctx = QreContext.from_prior(floor_eigenvalues(truth, ctx.floor_eps))
    return Setup(truth, data_model, recon_model, ctx, truth_ctx)


@dataclass
class StudyRow:
    intensity: float
    alpha: float
    delta: float
    trace_error: float
    qkl_to_truth: float
    qkl_penalty_gap: float
    data_residual: float
    iterations: int
    stop_reason: str
    solution: np.ndarray = field(default=None, repr=False)


CSV_COLUMNS = ("delta", "trace_error", "qkl_to_truth", "qkl_penalty_gap",
               "data_residual", "iterations", "stop_reason")


def solve(setup, g_obs, kind, alpha, cfg):
    scfg = SolverConfig(alpha=alpha, mu=cfg.mu, gap_threshold=cfg.gap_threshold,
                        max_iters=cfg.max_iters)
    if kind is FidelityKind.L2:
        return fista_solve(setup.recon_model, g_obs, setup.ctx, scfg)
    return cp_solve(setup.recon_model, g_obs, setup.ctx, kind, scfg)


def _metrics(setup, rho, g_true, kind):
    truth_pen = qkl_value(setup.truth, setup.ctx)
    return dict(
        trace_error=trace_norm(rho - setup.truth),
        qkl_to_truth=qkl_value(rho, setup.truth_ctx),
        qkl_penalty_gap=abs(qkl_value(rho, setup.ctx) - truth_pen),
        data_residual=fit_value(kind, g_true, setup.recon_model.apply(rho)),
    )


def run_row(setup, cfg, row, intensity):
    g_true = setup.exact_data
    kind = cfg.fidelity
    g_obs, delta = poisson_observe(g_true, intensity, cfg.seed, kind, row=row)
    alpha = cfg.alpha0_value * math.sqrt(delta)
    if alpha <= 0:
        nan = math.nan
        return StudyRow(intensity, alpha, delta, nan, nan, nan, nan, 0, "zero_noise")
    try:
        rep = solve(setup, g_obs, kind, alpha, cfg)
    except (ValueError, ArithmeticError) as exc:
        nan = math.nan
        return StudyRow(intensity, alpha, delta, nan, nan, nan, nan, 0,
                        f"error:{type(exc).__name__}")
    return StudyRow(intensity, alpha, delta, iterations=rep.iterations,
                    stop_reason=rep.stop_reason, solution=rep.solution,
                    **_metrics(setup, rep.solution, g_true, kind))


def run_study(cfg, csv_path=None, setup=None):
    """Reconstruct at every intensity and optionally write the CSV."""
    setup = build_setup(cfg) if setup is None else setup
    rows = [run_row(setup, cfg, i, inten) for i, inten in enumerate(cfg.intensities)]
    if csv_path is not None:
        write_csv(rows, csv_path, cfg)
    return rows


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.17g}"


def provenance(cfg):
    out = ["rng=numpy Philox, stream SeedSequence([seed, row])"]
    for k, v in asdict(cfg).items():
        if k == "intensities":
            v = " ".join(_fmt(x) for x in v)
        elif isinstance(v, FidelityKind):
            v = v.value
        out.append(f"{k}={v}")
    out.append(f"alpha0_effective={_fmt(cfg.alpha0_value)}")
    return out


def write_csv(rows, path, cfg=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if cfg is not None:
            for line in provenance(cfg):
                fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return path


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    out = []
    for rec in reader:
        out.append({k: (v if k == "stop_reason" else (int(v) if k == "iterations" else float(v)))
                    for k, v in rec.items()})
    return out
