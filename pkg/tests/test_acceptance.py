"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a one-line verdict that is printed in the terminal
summary, then asserts.
"""

import math
import time

import numpy as np
import pytest

from gkdvlab.config import ExperimentConfig
from gkdvlab.evolve import psi, psi_prime, psi_third
from gkdvlab.grid import Grid
from gkdvlab.nonlinearity import Nonlinearity, c_star, c_star_closed_form
from gkdvlab.scenarios import (run_nonlinear, scenario_linear_liouville, scenario_multi,
                               scenario_nonlinear)
from gkdvlab.soliton import build_profile, closed_form_power_soliton, dQdc, mass_derivative
from gkdvlab.spectral import (assemble_L, assemble_Ltilde, mu_weight, spectral_report,
                              virial_identity_check)

pytestmark = pytest.mark.slow


def _worst(pairs):
    """Largest value/limit ratio over (value, limit) pairs."""
    return max(v / lim for v, lim in pairs)


# ---------------------------------------------------------------------------
# shared long runs


@pytest.fixture(scope="session")
def propagation():
    cfg = ExperimentConfig.from_dict({"scenario": "soliton-propagation"})
    t = time.perf_counter()
    res = scenario_nonlinear(cfg)
    return res, time.perf_counter() - t


@pytest.fixture(scope="session")
def perturbed_run():
    cfg = ExperimentConfig.from_dict({"scenario": "perturbed-soliton"})
    t = time.perf_counter()
    run = run_nonlinear(cfg)
    res = scenario_nonlinear(cfg, run)
    return run, res, time.perf_counter() - t


# ---------------------------------------------------------------------------


def test_criterion_01_c_star(criterion):
    rows = []
    for p, q, a in [(2, 3, 1.0), (2, 3, 2.0), (3, 5, 1.0), (2, 4, 1.0)]:
        t = time.perf_counter()
        value = c_star(Nonlinearity.power_difference(p, q, 1.0, a))
        elapsed = time.perf_counter() - t
        exact = c_star_closed_form(p, q, a)
        rows.append((abs(value - exact) / exact, elapsed))
    ok = all(r <= 1e-8 and s < 1.0 for r, s in rows)
    criterion(1, "c* vs closed form", ok,
              f"max rel err {max(r for r, _ in rows):.2e} (<= 1e-8), "
              f"max time {max(s for _, s in rows):.3f}s (< 1s)")
    assert ok


def test_criterion_02_soliton_construction(criterion):
    x = np.linspace(-40, 40, 4001)
    sup = resid = 0.0
    h = 1e-3
    for p in (2, 3, 4, 5):
        for c in (0.5, 1.0, 2.0):
            prof = build_profile(Nonlinearity.pure_power(p), c)
            sup = max(sup, np.max(np.abs(prof.Q(x) - closed_form_power_soliton(p, c, x))))
            qx = prof.Qx
            qxx = (-qx(x + 2 * h) + 8 * qx(x + h) - 8 * qx(x - h) + qx(x - 2 * h)) / (12 * h)
            q = prof.Q(x)
            resid = max(resid, np.max(np.abs(qxx - c * q + prof.nl.f(q))))
    prof = build_profile(Nonlinearity.pure_power(2), 1.0)
    dm, de = abs(prof.mass() - 6.0), abs(prof.energy() + 1.8)
    ok = sup <= 1e-8 and resid <= 1e-8 and dm <= 1e-8 and de <= 1e-8
    criterion(2, "soliton construction", ok,
              f"sup err {sup:.1e}, ODE residual {resid:.1e}, |mass-6| {dm:.1e}, "
              f"|E+9/5| {de:.1e} (all <= 1e-8)")
    assert ok


def test_criterion_03_spectrum(criterion):
    prof = build_profile(Nonlinearity.pure_power(2), 1.0)
    grid = Grid(64.0, 4096)
    op = assemble_L(prof, grid)
    pairs = op.lowest(3)
    eig_err = max(abs(p.lam - e) for p, e in zip(pairs, (-1.25, 0.0, 0.75)))
    qx = prof.on_grid(grid, order="Qx")
    overlap = abs(grid.inner(pairs[1].vector, qx)) / grid.norm(qx)
    lt_lam, lt_overlap = 0.0, 1.0
    for p in (2, 3, 5):
        g = Grid(64.0, 8192)
        gs = assemble_Ltilde(1.0, p, g).lowest(1)[0]
        ref = np.cosh(g.x) ** (-(p + 1) / 2)
        lt_lam = max(lt_lam, abs(gs.lam))
        lt_overlap = min(lt_overlap, abs(g.inner(gs.vector, ref)) / g.norm(ref))
    ok = eig_err <= 1e-6 and overlap >= 0.99999 and lt_lam <= 1e-6 and lt_overlap >= 0.9999
    criterion(3, "spectrum of L and L~", ok,
              f"eig err {eig_err:.1e} (<= 1e-6), kernel overlap {overlap:.7f}, "
              f"L~ |lam| {lt_lam:.1e}, L~ overlap {lt_overlap:.6f}")
    assert ok


def test_criterion_04_S_c(criterion):
    worst = 0.0
    for p in (2, 3):
        nl = Nonlinearity.pure_power(p)
        grid = Grid(64.0, 2048)
        s = dQdc(build_profile(nl, 1.0), grid)
        d = 1e-3
        fd = (build_profile(nl, 1 + d).on_grid(grid)
              - build_profile(nl, 1 - d).on_grid(grid)) / (2 * d)
        worst = max(worst, grid.norm(s - fd) / grid.norm(fd))
    dmass = abs(mass_derivative(Nonlinearity.pure_power(5), 1.0))
    ok = worst <= 5e-4 and dmass <= 1e-6
    criterion(4, "S_c consistency", ok,
              f"S_c vs difference {worst:.1e} (<= 5e-4), p=5 d/dc mass {dmass:.1e} (<= 1e-6)")
    assert ok


def test_criterion_05_virial_identity(criterion):
    t0 = time.perf_counter()
    prof = build_profile(Nonlinearity.pure_power(2), 1.0)
    rng = np.random.Generator(np.random.Philox(2024))
    coefs = rng.standard_normal((20, 8))
    defects = {}
    for n in (4096, 8192):
        grid = Grid(64.0, n)
        op = assemble_L(prof, grid)
        mu = mu_weight(prof, grid)
        Q = prof.on_grid(grid)
        x = grid.x
        env = np.exp(-0.5 * (x / 2.5) ** 2)
        out = []
        for a in coefs:
            w = env * sum(a[2 * k] * np.cos(0.5 * k * x) + a[2 * k + 1] * np.sin(0.5 * k * x)
                          for k in range(4))
            lhs, rhs = virial_identity_check(op, w, mu, Q)
            out.append(abs(lhs - rhs) / abs(rhs))
        defects[n] = np.array(out)
    elapsed = time.perf_counter() - t0
    ref = defects[4096].max()
    gain = np.min(defects[4096] / defects[8192])
    ok = ref <= 1e-7 and gain >= 12 and elapsed < 30
    criterion(5, "virial identity", ok,
              f"max rel defect {ref:.1e} (<= 1e-7), min gain {gain:.1f}x (>= 12), "
              f"{elapsed:.1f}s (< 30s)")
    assert ok


def test_criterion_06_coercivity(criterion):
    cases = [
        (Nonlinearity.pure_power(2), 0.5, Grid(128.0, 2048)),
        (Nonlinearity.pure_power(2), 1.0, Grid(64.0, 1024)),
        (Nonlinearity.pure_power(2), 2.0, Grid(64.0, 1024)),
        (Nonlinearity.pure_power(3), 1.0, Grid(64.0, 1024)),
        (Nonlinearity.pure_power(5), 1.0, Grid(64.0, 2048)),
        (Nonlinearity.power_difference(2, 3), 0.1, Grid(256.0, 4096)),
        (Nonlinearity.power_difference(2, 3), 0.2, Grid(256.0, 4096)),
    ]
    lam1_min, window_ok = math.inf, True
    for nl, c, grid in cases:
        for mode in ("dual", "ground"):
            rep = spectral_report(build_profile(nl, c), grid, constraint_mode=mode)
            lam1_min = min(lam1_min, rep.lambda1 / rep.lambda0)
            q = rep.residuals["chi_quotient"]
            window_ok &= 0.5 * rep.lambda0 <= q <= rep.lambda0 * (1 + 1e-10)
    ok = lam1_min > 0 and window_ok
    criterion(6, "coercivity", ok,
              f"min lambda1/lambda0 {lam1_min:.3f} (> 0) over {len(cases)} cases x 2 modes, "
              f"quotient in [lambda0/2, lambda0]: {window_ok}")
    assert ok


def test_criterion_07_solver_fidelity(criterion, propagation):
    res, elapsed = propagation
    err, drift = res.summary["l2_error"], res.summary["drift"]
    ok = err <= 1e-5 and drift <= 1e-9 and elapsed < 120
    criterion(7, "solver fidelity", ok,
              f"L2 error {err:.1e} (<= 1e-5), drift {drift:.1e} (<= 1e-9), "
              f"{elapsed:.0f}s (< 120s)")
    assert ok


def test_criterion_08_localized_audits(criterion, propagation, perturbed_run):
    x = np.linspace(-200, 200, 10000)
    d1 = 1 / (4 * np.pi)
    psi_ok = (np.allclose(psi_prime(x), 1 / (4 * np.pi * np.cosh(x / 4)), rtol=1e-14)
              and np.all(psi_prime(x) > 0)
              and np.all(psi_third(x) <= psi_prime(x) / 16 * (1 + 1e-12)))
    neg = x[x < 0]
    lower_ok = bool(np.all(psi(neg) >= d1 * np.exp(neg / 4))
                and np.all(psi_prime(neg) >= d1 * np.exp(neg / 4)))
    excess = 0.0
    for res in (propagation[0], perturbed_run[1]):
        for rep in res.summary["monotonicity"]:
            excess = max(excess, rep["excess_I"], rep["excess_J"])
    ok = psi_ok and lower_ok and excess == 0.0
    criterion(8, "psi and monotonicity audits", ok,
              f"psi identities {psi_ok and lower_ok} (1e4 points), max monotonicity excess "
              f"{excess:.1e} (= 0, slack 1e-8)")
    assert ok


def test_criterion_09_asymptotic_stability(criterion, perturbed_run):
    run, res, elapsed = perturbed_run
    ratio, settle = res.summary["local_h1_ratio"], res.summary["c_settle"]
    ok = ratio <= 0.2 and settle <= 1e-3 and elapsed < 600
    criterion(9, "asymptotic stability", ok,
              f"local H1 ratio {ratio:.1e} (<= 0.2), |c(100)-c(50)| {settle:.1e} (<= 1e-3), "
              f"{elapsed:.0f}s (< 600s)")
    assert ok


def test_criterion_10_lyapunov_audit(criterion, perturbed_run):
    run, _, _ = perturbed_run
    cfg = ExperimentConfig.from_dict({"scenario": "virial-audit"})
    res = scenario_nonlinear(cfg, run)
    worst = res.summary["V_worst"]
    spreads = {k: res.summary["dual_ratios"][k]["spread"]
               for k in ("vQx_ratio", "vchi_ratio", "eta_v_ratio")}
    ok = worst <= 0 and all(s <= 10 for s in spreads.values())
    criterion(10, "Lyapunov audit", ok,
              f"V defect beyond noise {worst:.1e} (<= 0), ratio max/min "
              + ", ".join(f"{k} {v:.1e}" for k, v in spreads.items()) + " (<= 10)")
    assert ok


def test_criterion_11_linear_liouville(criterion):
    res = scenario_linear_liouville(ExperimentConfig.from_dict({"scenario": "linear-liouville"}))
    ratio = res.summary["decay_ratio"]
    ok = ratio <= 0.5
    criterion(11, "linear Liouville", ok,
              f"windowed residual t=200 / t=20 {ratio:.1e} (<= 0.5)")
    assert ok


def test_criterion_12_multi_soliton(criterion):
    res = scenario_multi(ExperimentConfig.from_dict({"scenario": "multi-soliton"}))
    drift, gain = res.summary["c_drift"], res.summary["min_separation_gain"]
    ok = drift <= 1e-3 and gain > 0
    criterion(12, "multi-soliton", ok,
              f"max |c_j(T)-c_j(0)| {drift:.1e} (<= 1e-3), min separation increment "
              f"{gain:.3f} (> 0)")
    assert ok
