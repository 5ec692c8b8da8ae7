import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdvlab.grid import Grid


def test_nodes_and_wavenumbers():
    g = Grid(2 * np.pi, 16)
    assert g.h == pytest.approx(2 * np.pi / 16)
    assert g.x[0] == pytest.approx(-np.pi)
    np.testing.assert_allclose(g.k, np.arange(9))
    assert g.k_odd[-1] == 0.0
    assert g.dealias_mask.sum() == 16 // 3 + 1


def test_spectral_derivatives_exact_on_trig():
    g = Grid(2 * np.pi, 64)
    u = np.sin(3 * g.x)
    np.testing.assert_allclose(g.diff(u), 3 * np.cos(3 * g.x), atol=1e-12)
    np.testing.assert_allclose(g.diff(u, 2), -9 * u, atol=1e-11)
    np.testing.assert_allclose(g.diff(u, 3), -27 * np.cos(3 * g.x), atol=1e-10)


def test_fd_fourth_order():
    errs = []
    for n in (128, 256):
        g = Grid(2 * np.pi, n)
        u = np.sin(g.x)
        errs.append(np.max(np.abs(g.fd_diff2(u) + u)))
        np.testing.assert_allclose(g.fd_matrix(2) @ u, g.fd_diff2(u), atol=1e-12)
        np.testing.assert_allclose(g.fd_matrix(1) @ u, g.fd_diff1(u), atol=1e-12)
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.05)


@settings(max_examples=30, deadline=None)
@given(d=st.floats(-10, 10))
def test_shift_translates(d):
    g = Grid(40.0, 256)
    u = np.exp(-g.x ** 2)
    expected = np.exp(-g.wrap(g.x - d) ** 2)
    np.testing.assert_allclose(g.shift(u, d), expected, atol=1e-10)


def test_quadrature_and_norms():
    g = Grid(40.0, 512)
    u = np.exp(-g.x ** 2 / 2)
    assert g.integrate(u) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-13)
    assert g.norm(u) ** 2 == pytest.approx(np.sqrt(np.pi), rel=1e-13)
    h1 = g.norm(u) ** 2 + g.norm(g.diff(u)) ** 2
    assert g.h1_norm(u) == pytest.approx(np.sqrt(h1))


def test_invalid_grid():
    with pytest.raises(ValueError):
        Grid(10.0, 7)
    with pytest.raises(ValueError):
        Grid(-1.0, 16)
