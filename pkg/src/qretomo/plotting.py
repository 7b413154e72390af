"""Log-log error-versus-noise plots written as standalone SVG."""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import write_csv  # noqa: E402

METRICS = (
    ("trace_error", r"tr$|\rho-\rho^\dagger|$"),
    ("qkl_to_truth", r"QKL$(\rho,\rho^\dagger)$"),
    ("qkl_penalty_gap", r"$|$QKL$(\rho,\rho_0)-$QKL$(\rho^\dagger,\rho_0)|$"),
    ("data_residual", r"$S_{g^\dagger}(T\rho)$"),
)


def emit_plot(rows, path, cfg=None, title=None):
    """Write ``path`` (SVG) with one curve per metric and the CSV beside it."""
    if not rows:
        raise ValueError("no study rows to plot")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(rows, key=lambda r: r.delta)
    delta = [r.delta for r in ordered]
    style = "o" if len(rows) == 1 else "o-"
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for key, label in METRICS:
        ys = [getattr(r, key) for r in ordered]
        pts = [(d, y) for d, y in zip(delta, ys) if d > 0 and y > 0]
        if pts:
            ax.plot(*zip(*pts), style, label=label, markersize=4)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\delta$")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    write_csv(rows, path.with_suffix(".csv"), cfg)
    return path
