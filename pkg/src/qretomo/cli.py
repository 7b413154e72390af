"""Command-line driver: ``qretomo {simulate,reconstruct,study,check}``."""
import argparse
import logging
import math
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import fileio
from .experiments import (
    ExperimentConfig,
    build_setup,
    homodyne_preset,
    pinem_preset,
    poisson_observe,
    solve,
)
from .fidelity import FidelityKind
from .kernels import BACKEND

log = logging.getLogger("qretomo")

FLAG_HELP = {
    "experiment": "pinem or homodyne (selects the preset defaults)",
    "fidelity": "l2 (FISTA) or kl (Chambolle-Pock)",
    "operator_variant": "homodyne reconstruction operator: semi or basis",
    "dim": "matrix size N",
    "n_theta": "number of phases",
    "coupling": "PINEM probe coupling g (default 3*g_pump)",
    "intensities": "comma-separated Poisson scale factors, increasing",
    "alpha0": "alpha = alpha0*sqrt(delta); default 1.0 (l2) or 0.1 (kl)",
}


def _add_config_flags(p):
    p.add_argument("--config", type=Path, help="key=value file; flags override it")
    for f in fields(ExperimentConfig):
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None,
                       metavar="VALUE", help=FLAG_HELP.get(f.name))


def config_from_args(args):
    raw = fileio.read_config(args.config) if getattr(args, "config", None) else {}
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            raw[f.name] = v
    experiment = raw.pop("experiment", "pinem")
    probe = ExperimentConfig()
    try:
        values = {k: probe.coerce(k, v) for k, v in raw.items()}
    except KeyError as exc:
        raise SystemExit(f"error: {exc.args[0]}") from None
    except ValueError as exc:
        raise SystemExit(f"error: bad config value ({exc})") from None
    preset = {"pinem": pinem_preset, "homodyne": homodyne_preset}.get(experiment)
    if preset is None:
        raise SystemExit(f"error: unknown experiment {experiment!r}")
    try:
        return preset(**values)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}") from None


def cmd_simulate(args):
    cfg = config_from_args(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    setup = build_setup(cfg)
    g_exact = setup.exact_data
    intensity = cfg.intensities[-1] if args.intensity is None else float(args.intensity)
    # same stream as the matching study row, so simulate and study agree
    row = cfg.intensities.index(intensity) if intensity in cfg.intensities else 0
    g_obs, delta = poisson_observe(g_exact, intensity, cfg.seed, cfg.fidelity, row=row)
    fileio.write_matrix(out / "rho_true.txt", setup.truth)
    fileio.write_grid(out / "g_exact.txt", g_exact)
    fileio.write_grid(out / "g_obs.txt", g_obs)
    print(f"wrote rho_true.txt, g_exact.txt, g_obs.txt to {out}")
    print(f"intensity={intensity:.6g} row={row} delta={delta:.17g}")
    return 0


def cmd_reconstruct(args):
    cfg = config_from_args(args)
    setup = build_setup(cfg)
    g_obs = fileio.read_grid(args.data)
    if g_obs.shape != tuple(setup.recon_model.data_shape):
        raise SystemExit(f"error: data shape {g_obs.shape} does not match the model "
                         f"{tuple(setup.recon_model.data_shape)}")
    if args.alpha is not None:
        alpha = float(args.alpha)
    else:
        from .fidelity import fit_value
        delta = fit_value(cfg.fidelity, g_obs, setup.exact_data)
        alpha = cfg.alpha0_value * math.sqrt(delta)
        log.info("delta from the simulated truth: %.6g", delta)
    if not alpha > 0:
        raise SystemExit("error: alpha must be positive (pass --alpha)")
    rep = solve(setup, g_obs, cfg.fidelity, alpha, cfg)
    fileio.write_matrix(args.output, rep.solution)
    algo = "fista" if cfg.fidelity is FidelityKind.L2 else "chambolle-pock"
    print(f"{algo}: alpha={alpha:.6g} iterations={rep.iterations} gap={rep.final_gap:.3e} "
          f"stop={rep.stop_reason} time={rep.wall_time:.2f}s -> {args.output}")
    return 0 if rep.stop_reason == "gap" else 2


def cmd_study(args):
    from .experiments import run_study
    from .plotting import emit_plot

    cfg = config_from_args(args)
    out = Path(cfg.output_dir)
    name = args.name or f"{cfg.experiment}_{cfg.fidelity.value}"
    rows = run_study(cfg)
    for r in rows:
        print(f"intensity={r.intensity:.3g} delta={r.delta:.4e} alpha={r.alpha:.4e} "
              f"trace_error={r.trace_error:.4e} iterations={r.iterations} {r.stop_reason}",
              flush=True)
    svg = emit_plot(rows, out / f"{name}.svg", cfg, title=name)
    print(f"wrote {svg} and {svg.with_suffix('.csv')}")
    return 0


def cmd_check(args):
    from .acceptance import CHECKS, QUICK, run_checks

    checks = QUICK if args.quick else CHECKS
    if args.only:
        wanted = {int(x) for x in args.only.split(",")}
        checks = tuple(c for c in CHECKS if c.number in wanted)
    print(f"kernel backend: {BACKEND}")
    results = run_checks(checks, sys.stdout)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def build_parser():
    p = argparse.ArgumentParser(prog="qretomo", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write the true state and Poisson data")
    _add_config_flags(s)
    s.add_argument("--intensity", default=None, help="Poisson scale (default: last of the ladder)")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("reconstruct", help="one regularized reconstruction from a data file")
    _add_config_flags(r)
    r.add_argument("--data", type=Path, required=True, help="grid file with observed data")
    r.add_argument("--alpha", default=None, help="regularization parameter")
    r.add_argument("--output", type=Path, default=Path("rho_rec.txt"))
    r.set_defaults(func=cmd_reconstruct)

    st = sub.add_parser("study", help="noise-level sweep with CSV and SVG output")
    _add_config_flags(st)
    st.add_argument("--name", default=None, help="output file stem")
    st.set_defaults(func=cmd_study)

    c = sub.add_parser("check", help="run the numerical acceptance checks")
    c.add_argument("--quick", action="store_true", help="skip the convergence studies")
    c.add_argument("--only", default=None, help="comma-separated criterion numbers")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    np.seterr(over="ignore", under="ignore")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
