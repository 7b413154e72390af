import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qretomo.special import bessel_j_row, g_inverse, hermite_fn, hermite_functions

# frozen from independent oracles (power series, bisection, closed form)
J1_OF_2 = 0.5767248077568734
OMEGA = 0.5671432904097838


def series_j(n, x, terms=80):
    # exact rational summation; the float series cancels badly for x ~ 10
    h = Fraction(x) / 2
    return float(sum(Fraction((-1) ** m, math.factorial(m) * math.factorial(m + n)) * h ** (2 * m + n)
                     for m in range(terms)))


def test_bessel_zero_argument():
    t = bessel_j_row(0.0, 4)
    np.testing.assert_array_equal(t.values, [0, 0, 0, 0, 1, 0, 0, 0, 0])


def test_bessel_j1_at_2():
    assert bessel_j_row(2.0, 30)[1] == pytest.approx(J1_OF_2, abs=1e-14)


@pytest.mark.parametrize("x", [0.3, 1.0, 3.46, 10.38])
def test_bessel_against_series_and_normalisation(x):
    t = bessel_j_row(x, 40)
    for n in range(0, 12):
        assert t[n] == pytest.approx(series_j(n, x), abs=1e-13)
        assert t[-n] == pytest.approx((-1) ** n * t[n], abs=0)
    assert abs(np.sum(t.values**2) - 1) <= 1e-10
    np.testing.assert_array_equal(t.orders, np.arange(-40, 41))


def test_bessel_scipy_oracle():
    sp = pytest.importorskip("scipy.special")
    for x in (0.5, 5.0, 30.0, 120.0):
        K = math.ceil(x + 10 * x ** (1 / 3)) + 10
        t = bessel_j_row(x, K)
        np.testing.assert_allclose(t.values, sp.jv(t.orders, x), atol=1e-13)


def test_bessel_window_too_small():
    with pytest.raises(ValueError, match="too small"):
        bessel_j_row(10.38, 5)
    with pytest.raises(IndexError):
        bessel_j_row(1.0, 20)[21]
    with pytest.raises(ValueError):
        bessel_j_row(-1.0, 5)


def test_hermite_values():
    assert hermite_fn(0, 0.0) == pytest.approx(np.pi**-0.25, abs=1e-15)
    assert hermite_fn(0, 0.0) == pytest.approx(0.7511255444649425, abs=1e-15)
    assert hermite_fn(1, 0.0) == 0.0
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(hermite_fn(2, x),
                               np.pi**-0.25 * (2 * x**2 - 1) / np.sqrt(2) * np.exp(-x**2 / 2),
                               atol=1e-15)
    with pytest.raises(ValueError):
        hermite_fn(201, 0.0)


def test_hermite_orthonormal_quadrature():
    # composite Gauss-Legendre on [-20, 20], 2000 nodes
    nodes, weights = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(-20, 20, 101)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    x = (mid[:, None] + half[:, None] * nodes).ravel()
    w = (half[:, None] * weights).ravel()
    u = hermite_functions(40, x)
    gram = (u * w) @ u.T
    assert np.max(np.abs(gram - np.eye(41))) <= 1e-8


def test_g_inverse_examples():
    assert g_inverse(1.0) == pytest.approx(1.0, abs=1e-15)
    assert g_inverse(0.0) == pytest.approx(OMEGA, abs=1e-15)
    s = g_inverse(700.0)
    assert s == pytest.approx(693.4583, abs=1e-4)
    assert abs(math.log(s) + s - 700) <= 1e-12
    assert isinstance(g_inverse(0.5), float)


def test_g_inverse_lambert_oracle():
    sp = pytest.importorskip("scipy.special")
    t = np.linspace(-30, 30, 301)
    np.testing.assert_allclose(g_inverse(t), sp.lambertw(np.exp(t)).real, rtol=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(-700, 700))
def test_g_inverse_residual(t):
    s = g_inverse(t)
    assert s > 0
    assert abs(math.log(s) + s - t) <= 1e-12 * max(1.0, abs(t))
