import numpy as np
import pytest

from gkdvlab.config import ExperimentConfig
from gkdvlab.grid import Grid
from gkdvlab.nonlinearity import Nonlinearity
from gkdvlab.scenarios import (fit_shift, make_perturbation, rng_for, run_scenario,
                               spectral_tail, window_residual)
from gkdvlab.soliton import build_profile

NL = Nonlinearity.pure_power(2)


@pytest.fixture(scope="module")
def setup():
    grid = Grid(64.0, 1024)
    return grid, build_profile(NL, 1.0)


@pytest.mark.parametrize("shape", ["gaussian", "S_c", "Q_prime", "random"])
def test_perturbation_normalized(setup, shape):
    grid, prof = setup
    cfg = ExperimentConfig.from_dict({"scenario": "perturbed-soliton",
                                      "perturbation": {"shape": shape, "amplitude": 0.01}})
    p = make_perturbation(cfg, grid, prof, rng_for(0))
    assert grid.norm(p) == pytest.approx(0.01 * grid.norm(prof.on_grid(grid)), rel=1e-12)


def test_random_perturbation_reproducible(setup):
    grid, prof = setup
    cfg = ExperimentConfig.from_dict({"scenario": "linear-liouville"})
    a = make_perturbation(cfg, grid, prof, rng_for(7))
    b = make_perturbation(cfg, grid, prof, rng_for(7))
    c = make_perturbation(cfg, grid, prof, rng_for(8))
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_zero_amplitude(setup):
    grid, prof = setup
    cfg = ExperimentConfig.from_dict({"scenario": "soliton-propagation"})
    assert not np.any(make_perturbation(cfg, grid, prof, rng_for(0)))


def test_fit_shift(setup):
    grid, prof = setup
    u = prof.on_grid(grid, center=1.2345)
    assert fit_shift(u, prof, grid, 1.0) == pytest.approx(1.2345, abs=1e-12)


def test_window_residual(setup):
    grid, prof = setup
    qx = prof.on_grid(grid, order="Qx")
    r, b = window_residual(0.3 * qx, qx, grid, 20.0)
    assert b == pytest.approx(0.3) and r < 1e-14


def test_spectral_tail(setup):
    grid, prof = setup
    assert spectral_tail(prof.on_grid(grid), grid) < 1e-10
    assert spectral_tail(np.sign(grid.x), grid) > 1e-3


def test_under_resolved_run_is_refused():
    cfg = ExperimentConfig.from_dict({"scenario": "soliton-propagation",
                                      "grid": {"L": 200.0, "N": 1024}})
    res = run_scenario(cfg)
    assert not res.passed
    assert len(res.series) == 0
    assert res.check("resolution: h <= 1/16").value == pytest.approx(200 / 1024)


def test_cstar_scenario():
    res = run_scenario(ExperimentConfig.from_dict({"scenario": "c-star-scan"}))
    assert res.passed and res.summary["c_star"] == pytest.approx(2 / 9, rel=1e-8)


def test_spectral_scenario():
    res = run_scenario(ExperimentConfig.from_dict({"scenario": "spectral-report"}))
    assert res.passed
    assert res.summary["dual"]["lambda0"] == pytest.approx(1.25, abs=1e-6)
