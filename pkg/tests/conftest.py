import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def herm(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)


def psd(rng, n, rank=None, trace=None):
    x = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal((n, rank or n))
    p = x @ x.conj().T
    p = 0.5 * (p + p.conj().T)
    if trace is not None:
        p *= trace / np.trace(p).real
    return p


def ref_fn(a, f):
    w, v = np.linalg.eigh(a)
    return (v * f(w)) @ v.conj().T


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for r in sorted(results, key=lambda r: r.number):
            terminalreporter.write_line(r.line())
