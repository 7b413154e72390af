"""Plain-text formats for matrices, data grids and key=value config files.

Matrix file::

    QRETOMO-MATRIX 1
    N
    re,im re,im ...      (N lines of N entries, row-major)

Grid file::

    QRETOMO-GRID 1
    n_rows n_cols
    v v v ...            (n_rows lines)

Floats are written with 17 significant digits so a round trip is exact.
"""
from pathlib import Path

import numpy as np

MATRIX_MAGIC = "QRETOMO-MATRIX 1"
GRID_MAGIC = "QRETOMO-GRID 1"


class FormatError(ValueError):
    pass


def _f(x):
    return f"{x:.17g}"


def write_matrix(path, a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    lines = [MATRIX_MAGIC, str(a.shape[0])]
    lines += [" ".join(f"{_f(z.real)},{_f(z.imag)}" for z in row) for row in a]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _lines(path, magic):
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != magic:
        raise FormatError(f"{path}: missing header {magic!r}")
    return lines[1:]


def read_matrix(path):
    lines = _lines(path, MATRIX_MAGIC)
    try:
        n = int(lines[0])
        rows = [[complex(*map(float, tok.split(","))) for tok in ln.split()] for ln in lines[1:]]
    except (IndexError, ValueError, TypeError) as exc:
        raise FormatError(f"{path}: malformed matrix file ({exc})") from None
    if len(rows) != n or any(len(r) != n for r in rows):
        raise FormatError(f"{path}: expected {n} rows of {n} entries")
    return np.array(rows, dtype=np.complex128)


def write_grid(path, g):
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError("grid must be two-dimensional")
    lines = [GRID_MAGIC, f"{g.shape[0]} {g.shape[1]}"]
    lines += [" ".join(_f(v) for v in row) for row in g]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_grid(path):
    lines = _lines(path, GRID_MAGIC)
    try:
        r, c = map(int, lines[0].split())
        g = np.array([[float(v) for v in ln.split()] for ln in lines[1:]], dtype=np.float64)
    except (IndexError, ValueError) as exc:
        raise FormatError(f"{path}: malformed grid file ({exc})") from None
    if g.shape != (r, c):
        raise FormatError(f"{path}: expected shape ({r}, {c}), got {g.shape}")
    return g


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"{path}:{no}: empty key")
        out[key.replace("-", "_")] = value
    return out
