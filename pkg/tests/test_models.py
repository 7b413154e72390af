import math

import numpy as np
import pytest

from qretomo.experiments import make_cat_state
from qretomo.models import homodyne_build, norm_estimate, pinem_build
from qretomo.special import bessel_j_row
from qretomo.spectral import trace_inner

from conftest import herm, psd


@pytest.fixture(scope="module")
def hm():
    return homodyne_build(21, 60, -5.0, 5.0, 120)


def test_pinem_zero_coupling(rng):
    m = pinem_build(5, 0.0, 4)
    rho = psd(rng, 5)
    K = m.bessel_halfwidth
    out = m.apply(rho)
    np.testing.assert_allclose(out[:, K:K + 5], np.tile(np.diag(rho).real, (4, 1)), atol=1e-15)
    assert np.all(out[:, :K] == 0)
    vac = np.zeros((5, 5)); vac[2, 2] = 1
    grid = m.apply(vac)
    assert np.all(grid[:, K + 2] == 1) and grid.sum() == 4
    np.testing.assert_allclose(m.adjoint(np.ones(m.data_shape)), 4 * np.eye(5), atol=1e-15)
    assert np.all(m.adjoint(np.zeros(m.data_shape)) == 0)


def test_pinem_center_state_is_bessel_squared():
    m = pinem_build(7, 1.3, 5)
    rho = np.zeros((7, 7)); rho[3, 3] = 1
    t = bessel_j_row(2.6, 40)
    expect = t[m.outcomes] ** 2
    np.testing.assert_allclose(m.apply(rho), np.tile(expect, (5, 1)), atol=1e-15)


def test_pinem_geometry_and_mass(rng):
    m = pinem_build(41, 5.19, 100)
    assert m.data_shape == (100, 41 + 2 * (math.ceil(2 * 5.19) + 20))
    assert m.thetas[0] == -np.pi and m.thetas[-1] < np.pi
    rho = psd(rng, 41, trace=1.3)
    assert np.max(np.abs(m.apply(rho).sum(axis=1) - 1.3)) <= 1e-8


def test_pinem_errors():
    with pytest.raises(ValueError, match="odd"):
        pinem_build(4, 1.0, 3)
    with pytest.raises(ValueError, match="unitary"):
        pinem_build(41, 5.0, 3, bessel_halfwidth=2)
    m = pinem_build(3, 1.0, 2)
    with pytest.raises(ValueError):
        m.apply(np.eye(4))
    with pytest.raises(ValueError):
        m.adjoint(np.zeros((3, 3)))


def test_adjoint_pairing(rng, hm):
    for m in (pinem_build(9, 2.0, 7), hm.operator("semi"), hm.operator("basis")):
        for _ in range(10):
            rho, g = herm(rng, m.dim), rng.standard_normal(m.data_shape)
            lhs = np.sum(m.apply(rho) * g)
            assert lhs == pytest.approx(trace_inner(rho, m.adjoint(g)), rel=1e-10)


def test_homodyne_geometry(hm):
    assert hm.data_shape == (60, 120)
    assert hm.bin_width == pytest.approx(1 / 12)
    assert hm.thetas[0] == 0 and hm.thetas[-1] < np.pi
    np.testing.assert_array_equal(hm.kernel_semi, hm.kernel_semi.transpose(0, 2, 1))
    # int_{-5}^{5} u_0^2 = erf(5)
    assert hm.kernel_semi[:, 0, 0].sum() == pytest.approx(math.erf(5.0), abs=1e-12)


def test_homodyne_vacuum_and_diagonal(rng, hm):
    vac = np.zeros((21, 21)); vac[0, 0] = 1
    semi = hm.apply_semi(vac)
    np.testing.assert_allclose(semi, np.tile(hm.kernel_semi[:, 0, 0], (60, 1)), atol=1e-16)
    assert semi.sum(axis=1) == pytest.approx(np.full(60, math.erf(5.0)))
    h = hm.bin_width
    c0 = hm.kernel_basis[:, 0]
    np.testing.assert_allclose(hm.apply_basis(vac)[0], c0**2, atol=1e-16)
    # c0^2 = (int_bin u_0)^2 / h, bin integral from erf
    e = np.array([math.erf(x / math.sqrt(2)) for x in hm.edges])
    integral = np.pi**-0.25 * math.sqrt(np.pi / 2) * np.diff(e)
    np.testing.assert_allclose(c0**2, integral**2 / h, rtol=1e-9)
    d = np.diag(rng.uniform(0, 1, 21))
    for out in (hm.apply_semi(d), hm.apply_basis(d)):
        np.testing.assert_allclose(out, np.tile(out[0], (60, 1)), atol=1e-15)


def test_homodyne_variants_close_for_cat(hm):
    cat = make_cat_state(3.0, 21)
    assert np.max(np.abs(hm.apply_semi(cat) - hm.apply_basis(cat))) <= 0.02


def test_homodyne_errors(hm):
    with pytest.raises(ValueError):
        hm.operator("exact")
    with pytest.raises(ValueError):
        homodyne_build(5, 3, 1.0, -1.0, 10)


def test_norm_estimate():
    m = pinem_build(5, 0.0, 1)
    assert 1.0 <= norm_estimate(m) <= 1.05 + 1e-12
    m2 = pinem_build(5, 0.0, 2)
    assert norm_estimate(m2) == pytest.approx(2 * norm_estimate(m), rel=0.05)
    with pytest.raises(ValueError):
        norm_estimate(m, iters=5)
    p = pinem_build(7, 1.0, 6)
    # explicit matrix of T*T on Herm(7) in an orthonormal real basis
    n = 7
    basis = []
    for i in range(n):
        e = np.zeros((n, n), complex); e[i, i] = 1; basis.append(e)
        for j in range(i + 1, n):
            e = np.zeros((n, n), complex); e[i, j] = e[j, i] = 1 / np.sqrt(2); basis.append(e)
            e = np.zeros((n, n), complex); e[i, j] = 1j / np.sqrt(2); e[j, i] = -1j / np.sqrt(2)
            basis.append(e)
    M = np.array([[trace_inner(b, p.adjoint(p.apply(c))) for c in basis] for b in basis])
    exact = np.max(np.linalg.eigvalsh(0.5 * (M + M.T)))
    assert exact <= p.norm_bound <= 1.05 * exact + 1e-12
