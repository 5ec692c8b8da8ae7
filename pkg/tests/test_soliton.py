import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkdvlab.grid import Grid
from gkdvlab.nonlinearity import Nonlinearity
from gkdvlab.soliton import (ProfileError, SolitonProfile, build_profile,
                             closed_form_power_soliton, dQdc, mass_derivative, verify_decay)

X = np.linspace(-30, 30, 2401)


def ode_residual(prof, x, h=1e-3):
    """Q'' - cQ + f(Q) with Q'' from a fourth-order difference of Q'."""
    qx = prof.Qx
    qxx = (-qx(x + 2 * h) + 8 * qx(x + h) - 8 * qx(x - h) + qx(x - 2 * h)) / (12 * h)
    q = prof.Q(x)
    return qxx - prof.c * q + prof.nl.f(q)


def test_closed_form_oracle_values():
    # frozen: (3/2) sech^2(x/2) at x = 0 and 1
    q = closed_form_power_soliton(2, 1.0, np.array([0.0, 1.0]))
    np.testing.assert_allclose(q, [1.5, 1.5 / np.cosh(0.5) ** 2], rtol=1e-15)


@pytest.mark.parametrize("p", [2, 3, 4, 5])
@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_profile_matches_closed_form(p, c):
    prof = build_profile(Nonlinearity.pure_power(p), c)
    err = np.max(np.abs(prof.Q(X) - closed_form_power_soliton(p, c, X)))
    assert err <= 1e-8
    assert np.max(np.abs(ode_residual(prof, X))) <= 1e-8


def test_invariants_u2():
    prof = build_profile(Nonlinearity.pure_power(2), 1.0)
    assert prof.mass() == pytest.approx(6.0, abs=1e-8)
    assert prof.energy() == pytest.approx(-1.8, abs=1e-8)


def test_shape_properties():
    prof = build_profile(Nonlinearity.pure_power(3), 1.0)
    x = np.linspace(0, 40, 500)
    q = prof.Q(x)
    np.testing.assert_array_equal(prof.Q(-x), q)
    assert np.all(np.diff(q) < 0)
    assert np.all(prof.Qx(x[1:]) < 0)
    assert prof.Q(0.0) == pytest.approx(prof.s0)


def test_tail_continuity_at_match_point():
    prof = build_profile(Nonlinearity.pure_power(2), 1.0)
    m = prof.match_point
    for fn in (prof.Q, prof.Qx):
        assert fn(m - 1e-9) == pytest.approx(fn(m + 1e-9), rel=1e-6)


def test_decay_ratio_limit():
    # (3/2) sech^2(x/2) e^x -> 6
    prof = build_profile(Nonlinearity.pure_power(2), 1.0)
    lo, hi = verify_decay(prof, 40.0)
    assert hi == pytest.approx(6.0, rel=1e-8)
    exact = 1.5 / np.cosh(np.array([20.0, 30.0, 40.0]) / 2) ** 2 * np.exp([20.0, 30.0, 40.0])
    np.testing.assert_allclose(exact, 6.0, rtol=1e-7)


@settings(max_examples=15, deadline=None)
@given(c=st.floats(0.3, 3.0))
def test_pure_power_scaling(c):
    # Q_c(x) = c^(1/(p-1)) Q_1(sqrt(c) x)
    nl = Nonlinearity.pure_power(3)
    q1 = build_profile(nl, 1.0)
    qc = SolitonProfile(nl, c)
    x = np.linspace(-10, 10, 101)
    np.testing.assert_allclose(qc.Q(x), np.sqrt(c) * q1.Q(np.sqrt(c) * x), atol=1e-12)


def test_power_difference_profile_first_integral():
    nl = Nonlinearity.power_difference(2, 3)
    prof = build_profile(nl, 0.2)
    q, qx = prof.Q(X), prof.Qx(X)
    resid = qx ** 2 - prof.c * q ** 2 + 2 * nl.F(q)
    assert np.max(np.abs(resid)) < 1e-12
    assert np.max(np.abs(ode_residual(prof, X))) <= 1e-8


def test_no_soliton_above_threshold():
    with pytest.raises(ProfileError):
        SolitonProfile(Nonlinearity.power_difference(2, 3), 0.3)


def test_dqdc_against_difference():
    nl = Nonlinearity.pure_power(2)
    grid = Grid(64.0, 1024)
    s = dQdc(build_profile(nl, 1.0), grid)
    d = 1e-3
    fd = (build_profile(nl, 1 + d).on_grid(grid) - build_profile(nl, 1 - d).on_grid(grid)) / (2 * d)
    assert grid.norm(s - fd) / grid.norm(fd) <= 5e-4


def test_critical_mass_derivative():
    assert abs(mass_derivative(Nonlinearity.pure_power(5), 1.0)) <= 1e-6
    # subcritical p = 2: d/dc (6 c^(3/2)) = 9 at c = 1
    assert mass_derivative(Nonlinearity.pure_power(2), 1.0) == pytest.approx(9.0, rel=1e-8)


def test_csv_export(tmp_path):
    prof = build_profile(Nonlinearity.pure_power(2), 1.0)
    path = tmp_path / "q.csv"
    prof.to_csv(path, x=np.array([0.0, 1.0]))
    lines = path.read_text().splitlines()
    assert len(lines) == 3
