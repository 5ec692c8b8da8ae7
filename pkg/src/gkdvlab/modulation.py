"""Modulation of near-soliton states: u = Q_c(x - rho) + eta with two
orthogonality conditions fixing (c, rho), the dual variable v, the
Lyapunov functional V and the multi-soliton extension."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .nonlinearity import Nonlinearity, soliton_exists
from .soliton import build_profile, dQdc
from .spectral import (assemble_L, default_B, ground_state, mu_values,
                       truncate_chi, WeightMu)

MODES = ("ground", "dual")
ROUNDOFF = 256 * np.finfo(float).eps


class OutOfTube(RuntimeError):
    """u is too far from the soliton family for the decomposition."""


class SingularJacobian(RuntimeError):
    pass


def _lagrange_weights(nodes, x):
    w = np.ones(len(nodes))
    for i, xi in enumerate(nodes):
        for j, xj in enumerate(nodes):
            if i != j:
                w[i] *= (x - xj) / (xi - xj)
    return w


class SolitonFamily:
    """Soliton data for one nonlinearity on one grid, for any speed c.

    Profiles Q_c, Q_c' are evaluated exactly. The ground state chi~_c, the
    truncation chi_c, L_c chi_c and S_c = dQ/dc are computed on a lattice of
    speeds and interpolated in c by cubic Lagrange polynomials. All fields are
    stored centered at 0 and moved by spectral translation.
    """

    def __init__(self, nl: Nonlinearity, grid: Grid, B: float, lattice: float = 1e-3):
        self.nl = nl
        self.grid = grid
        self.B = float(B)
        self.lattice = float(lattice)
        self._nodes = {}

    @classmethod
    def around(cls, nl, grid, c0, **kw):
        return cls(nl, grid, default_B(c0), **kw)

    def profile(self, c):
        return build_profile(self.nl, float(c))

    def _node(self, k: int):
        if k not in self._nodes:
            c = k * self.lattice
            prof = self.profile(c)
            op = assemble_L(prof, self.grid)
            gs = ground_state(op)
            chi, _ = truncate_chi(gs, self.B, op, prof.on_grid(self.grid))
            self._nodes[k] = {
                "lam0": -gs.lam,
                "chi_tilde": gs.vector,
                "chi": chi,
                "Lchi": op(chi),
                "S": dQdc(prof, self.grid),
            }
        return self._nodes[k]

    def centered(self, name: str, c: float) -> np.ndarray:
        base = math.floor(c / self.lattice)
        ks = range(base - 1, base + 3)
        if ks[0] * self.lattice <= 0:
            raise OutOfTube(f"c={c:g} too close to 0 for the lattice")
        w = _lagrange_weights([k * self.lattice for k in ks], c)
        return sum(wi * self._node(k)[name] for wi, k in zip(w, ks))

    def lam0(self, c: float) -> float:
        return float(self.centered("lam0", c))

    def field(self, name: str, c: float, rho: float) -> np.ndarray:
        """Q, Qx (exact) or a lattice field, translated to rho."""
        if name in ("Q", "Qx"):
            return self.profile(c).on_grid(self.grid, center=rho, order=name)
        return self.grid.shift(self.centered(name, c), rho)

    def mu(self, c: float, rho: float) -> WeightMu:
        mu, mup = mu_values(self.profile(c), self.grid.wrap(self.grid.x - rho))
        return WeightMu(mu, mup)


@dataclass
class ModulationState:
    c: float
    rho: float
    eta: np.ndarray
    mode: str
    newton_residual: float
    iterations: int
    v: np.ndarray | None = None


@dataclass
class MultiModulationState:
    c: list
    rho: list
    eta: np.ndarray
    residuals: list
    sweeps: int


def _constraints(fam: SolitonFamily, mode: str, c: float, rho: float):
    if mode == "ground":
        return fam.field("chi_tilde", c, rho), fam.field("Qx", c, rho)
    if mode == "dual":
        return fam.field("Lchi", c, rho), fam.field("Qx", c, rho)
    raise ValueError(f"unknown mode {mode!r}")


def orthogonality_residuals(state: ModulationState, fam: SolitonFamily,
                            u_norm: float = 0.0):
    """|int eta w_i| / (||w_i|| (||eta|| + 256 eps ||u||)) for the mode's
    constraints; the second term is the round-off level of the products."""
    g = fam.grid
    denom = g.norm(state.eta) + ROUNDOFF * u_norm
    out = []
    for w in _constraints(fam, state.mode, state.c, state.rho):
        out.append(abs(g.inner(state.eta, w)) / (g.norm(w) * denom) if denom > 0 else 0.0)
    return out


def decompose(u, guess, fam: SolitonFamily, mode: str = "ground", tol: float = 1e-12,
              max_iter: int = 50, alpha0: float = 0.1) -> ModulationState:
    """Newton iteration on (c, rho) for int eta w_1 = int eta w_2 = 0.

    The stopping test is |int eta w_i| <= (tol ||eta|| + floor) ||w_i||, where
    floor = 256 eps ||u|| is the round-off level of the inner products.
    Raises OutOfTube if u is not within alpha0 (relative, in H^1) of Q_guess
    or if the iteration leaves the family.
    """
    g = fam.grid
    c, rho = float(guess[0]), float(guess[1])
    if not (c > 0 and soliton_exists(fam.nl, c)):
        raise OutOfTube(f"no soliton at guess c={c:g}")
    q = fam.field("Q", c, rho)
    if g.h1_norm(u - q) > alpha0 * g.h1_norm(q):
        raise OutOfTube("u is outside the modulation tube around the guess")
    floor = ROUNDOFF * g.norm(u)
    resid = math.inf
    for it in range(1, max_iter + 1):
        q = fam.field("Q", c, rho)
        eta = u - q
        w1, w2 = _constraints(fam, mode, c, rho)
        R = np.array([g.inner(eta, w1), g.inner(eta, w2)])
        scale = np.array([g.norm(w1), g.norm(w2)])
        ne = g.norm(eta)
        resid = float(np.max(np.abs(R) / scale) / ne) if ne > 0 else 0.0
        if np.all(np.abs(R) / scale <= tol * ne + floor):
            break
        qx = fam.field("Qx", c, rho)
        S = fam.field("S", c, rho)
        J = np.empty((2, 2))
        for i, w in enumerate((w1, w2)):
            J[i, 0] = -g.inner(S, w)
            J[i, 1] = g.inner(qx, w) - g.inner(eta, g.diff(w))
        colnorm = np.linalg.norm(J, axis=0)
        if abs(np.linalg.det(J)) < 1e-12 * np.prod(colnorm):
            raise SingularJacobian(f"Jacobian near-singular at c={c:g}, rho={rho:g}")
        dc, drho = np.linalg.solve(J, -R)
        c, rho = c + dc, rho + drho
        if not (c > 0 and soliton_exists(fam.nl, c)):
            raise OutOfTube(f"Newton left the soliton family (c={c:g})")
    else:
        raise OutOfTube(f"Newton did not converge in {max_iter} iterations "
                        f"(residual {resid:.3e})")
    return ModulationState(c, rho, eta, mode, resid, it)


def dual_v(state: ModulationState, fam: SolitonFamily) -> np.ndarray:
    """v = -eta_xx + c eta - (f(Q_c + eta) - f(Q_c)), stored on the state."""
    g = fam.grid
    q = fam.field("Q", state.c, state.rho)
    eta = state.eta
    f = fam.nl.poly_f
    state.v = -g.diff(eta, 2) + state.c * eta - (f(q + eta) - f(q))
    return state.v


def dual_alpha(eta, op, chi, Q) -> float:
    """alpha = -int eta L chi / int chi Q, so that v = L eta + alpha Q is
    orthogonal to chi and Q'."""
    denom = op.grid.inner(chi, Q)
    if denom <= 0:
        raise ValueError("int chi Q <= 0")
    return -op.grid.inner(eta, op(chi)) / denom


@dataclass
class DualReport:
    vQx_ratio: float
    vchi_ratio: float
    combined_ratio: float
    eta_v_ratio: float


def check_dual_estimates(state: ModulationState, fam: SolitonFamily) -> DualReport:
    """|int v Q'| / ||eta||^2, |int v chi| / ||eta||^2, their sum and
    ||eta|| / ||v||."""
    g = fam.grid
    v = state.v if state.v is not None else dual_v(state, fam)
    n2 = g.norm(state.eta) ** 2
    a = abs(g.inner(v, fam.field("Qx", state.c, state.rho)))
    b = abs(g.inner(v, fam.field("chi", state.c, state.rho)))
    nv = g.norm(v)
    if n2 == 0:
        return DualReport(0.0, 0.0, 0.0, 0.0)
    return DualReport(a / n2, b / n2, (a + b) / n2, math.sqrt(n2) / nv)


def epsilon0(B: float, lam3: float, nl: Nonlinearity, c_range, samples: int = 2001) -> float:
    """(1/2) lam3^2 inf{mu_c'(x) : |x| < B, c in c_range}."""
    x = np.linspace(0.0, B, samples)
    lo, hi = c_range
    inf = math.inf
    for c in np.linspace(lo, hi, 5):
        _, mup = mu_values(build_profile(nl, float(c)), x)
        inf = min(inf, float(mup.min()))
    return 0.5 * lam3 ** 2 * inf


def lyapunov_V(state: ModulationState, mu: WeightMu, eps0: float, grid: Grid) -> float:
    """V = -(1/2) int (mu_c + eps0 x) v^2 in the rho-centered frame."""
    z = grid.wrap(grid.x - state.rho)
    v = state.v
    return -0.5 * grid.integrate((mu.mu + eps0 * z) * v * v)


def time_derivative(times, values):
    """Centered differences at spacing D and 2D on a uniform series.

    Returns (t, d, noise) on interior points, with d the 2D-accurate
    Richardson combination and noise = |d_D - d_2D|.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    dt = np.diff(t)
    if t.size < 5 or np.ptp(dt) > 1e-9 * dt.mean():
        raise ValueError("need at least 5 uniformly spaced samples")
    D = dt.mean()
    d1 = (y[3:-1] - y[1:-3]) / (2 * D)
    d2 = (y[4:] - y[:-4]) / (4 * D)
    d = (4.0 * d1 - d2) / 3.0
    return t[2:-2], d, np.abs(d1 - d2)


@dataclass
class RateReport:
    t: np.ndarray
    defect: np.ndarray
    noise: np.ndarray
    worst: float

    @property
    def ok(self) -> bool:
        return self.worst <= 0.0


def virial_rate_check(times, lhs_integral, rhs, scale: float = -0.5,
                      floor: float = 1e-12) -> RateReport:
    """Defect of scale * d/dt(lhs_integral) >= rhs along a sampled run.

    `worst` is the largest negative defect beyond the Richardson noise
    estimate (<= 0 means the inequality holds everywhere).
    """
    t, d, noise = time_derivative(times, lhs_integral)
    rhs = np.asarray(rhs, dtype=float)[2:-2]
    defect = scale * d - rhs
    # an inequality "violated" within noise counts as satisfied
    excess = -(defect + noise * abs(scale) + floor)
    return RateReport(t, defect, noise * abs(scale), float(np.max(excess)))


def multi_decompose(u, guesses, families, L0: float = 20.0, tol: float = 1e-11,
                    max_sweeps: int = 30) -> MultiModulationState:
    """Gauss-Seidel sweeps of single-soliton decompositions, rightmost
    (first after sorting by rho) soliton first."""
    order = sorted(range(len(guesses)), key=lambda j: -guesses[j][1])
    cs = [float(guesses[j][0]) for j in order]
    rhos = [float(guesses[j][1]) for j in order]
    fams = [families[j] for j in order]
    grid = fams[0].grid
    for j in range(len(rhos) - 1):
        if rhos[j] - rhos[j + 1] <= L0 / 2:
            raise ValueError(f"solitons {j} and {j + 1} are not separated by L0/2")

    def others(skip):
        total = np.zeros(grid.N)
        for k, fam in enumerate(fams):
            if k != skip:
                total += fam.field("Q", cs[k], rhos[k])
        return total

    residuals = [math.inf] * len(cs)
    for sweep in range(1, max_sweeps + 1):
        moved = 0.0
        for j, fam in enumerate(fams):
            st = decompose(u - others(j), (cs[j], rhos[j]), fam, mode="ground",
                           tol=min(tol, 1e-12))
            moved = max(moved, abs(st.c - cs[j]), abs(st.rho - rhos[j]))
            cs[j], rhos[j] = st.c, st.rho
        eta = u - others(-1)
        for j, fam in enumerate(fams):
            st = ModulationState(cs[j], rhos[j], eta, "ground", 0.0, 0)
            residuals[j] = max(orthogonality_residuals(st, fam, grid.norm(u)))
        if max(residuals) <= tol or moved <= 1e-14:
            break
    else:
        raise OutOfTube("multi-soliton sweeps did not converge")
    for j in range(len(rhos) - 1):
        if rhos[j] - rhos[j + 1] <= L0 / 2:
            raise ValueError("separation violated after decomposition")
    inv = np.argsort(order)
    return MultiModulationState([cs[i] for i in inv], [rhos[i] for i in inv],
                                eta, [residuals[i] for i in inv], sweep)
