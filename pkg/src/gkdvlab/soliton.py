"""Solitary-wave profiles Q_c solving Q'' + f(Q) = c Q.

The profile is built from the first integral (Q')^2 = c Q^2 - 2F(Q): the
inverse map x(Q) is a quadrature, done in two smooth parametrizations,

    core  s = s0 - tau^2        dx/dtau   = 2 / sqrt(G(s0 - tau^2) / tau^2)
    tail  s = s0 exp(-sigma)    dx/dsigma = 1 / sqrt(c - 2 F(s) / s^2)

with G(s) = c s^2 - 2F(s). Both integrands are bounded and analytic, so
Gauss-Legendre panels converge to round-off. Q, Q', Q'', Q''' are known
exactly at the panel nodes, and Q(x), Q'(x) are recovered by quintic Hermite
interpolation on those nodes.
"""

from __future__ import annotations

import csv
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss

from .grid import Grid
from .nonlinearity import Nonlinearity, first_positive_zero, soliton_exists


class ProfileError(RuntimeError):
    pass


def _hermite5(t, dx, y0, d0, s0, y1, d1, s1):
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    h1 = t - 6 * t3 + 8 * t4 - 3 * t5
    h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
    h3 = 0.5 * t3 - t4 + 0.5 * t5
    h4 = -4 * t3 + 7 * t4 - 3 * t5
    h5 = 10 * t3 - 15 * t4 + 6 * t5
    return (y0 * h0 + y1 * h5 + dx * (d0 * h1 + d1 * h4)
            + dx * dx * (s0 * h2 + s1 * h3))


def _panel_nodes(a, b, n, order):
    """Gauss nodes/weights for n equal panels on [a, b]."""
    xg, wg = leggauss(order)
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return edges, mid[:, None] + half[:, None] * xg, half[:, None] * wg


class SolitonProfile:
    """Even, positive soliton Q_c with Q_c(0) = s0.

    Attributes of interest: `c`, `s0`, `nl`, `x_nodes` (the x-of-Q table),
    `tail_amplitude` and `match_point` (beyond which Q = A exp(-sqrt(c) x)).
    """

    def __init__(self, nl: Nonlinearity, c: float, tail_ratio: float = 1e-10,
                 spacing: float = 0.02, gauss_order: int = 10):
        if not soliton_exists(nl, c):
            raise ProfileError(f"no soliton for c={c!r} with {nl!r}")
        self.nl = nl
        self.c = float(c)
        self.s0 = float(first_positive_zero(nl, c))
        self.tail_ratio = tail_ratio
        s0, c = self.s0, self.c

        G = Polynomial([0.0, 0.0, c]) - 2.0 * nl.poly_F
        # G(s0 - u) / u with the vanishing constant term dropped exactly
        core_poly = Polynomial(G(Polynomial([s0, -1.0])).coef[1:])
        half_c = Polynomial([0.5 * c] + [-ck / (k + 1) for k, ck in
                                          enumerate(nl.coefficients) if k >= 2])
        self._core_poly = core_poly
        self.reduced = half_c  # c/2 - F(s)/s^2

        self._dx_dtau = lambda tau: 2.0 / np.sqrt(core_poly(tau * tau))
        self._dx_dsigma = lambda sig: 1.0 / np.sqrt(2.0 * half_c(s0 * np.exp(-sig)))

        kappa = np.sqrt(max(c, float(nl.df(s0)) - c))
        target = spacing / kappa
        tau_split = np.sqrt(0.5 * s0)
        sig_split, sig_end = np.log(2.0), np.log(1.0 / tail_ratio)

        probe = np.linspace(0.0, tau_split, 257)
        n_core = int(np.ceil(tau_split * np.max(self._dx_dtau(probe)) / target))
        probe = np.linspace(sig_split, sig_end, 257)
        n_tail = int(np.ceil((sig_end - sig_split) * np.max(self._dx_dsigma(probe)) / target))

        core_edges, core_x, core_w = _panel_nodes(0.0, tau_split, n_core, gauss_order)
        tail_edges, tail_x, tail_w = _panel_nodes(sig_split, sig_end, n_tail, gauss_order)
        core_dx = np.sum(core_w * self._dx_dtau(core_x), axis=1)
        tail_dx = np.sum(tail_w * self._dx_dsigma(tail_x), axis=1)
        self._check_panels(0.0, tau_split, n_core, self._dx_dtau, core_dx, gauss_order, "core")
        self._check_panels(sig_split, sig_end, n_tail, self._dx_dsigma, tail_dx, gauss_order, "tail")

        self._core_quad = (core_x, core_w)
        self._tail_quad = (tail_x, tail_w)

        x_nodes = np.concatenate([[0.0], np.cumsum(core_dx)])
        x_nodes = np.concatenate([x_nodes, x_nodes[-1] + np.cumsum(tail_dx)])
        tau = core_edges
        q_core = s0 - tau ** 2
        qx_core = -tau * np.sqrt(core_poly(tau ** 2))
        q_tail = s0 * np.exp(-tail_edges[1:])
        qx_tail = -q_tail * np.sqrt(2.0 * half_c(q_tail))
        q = np.concatenate([q_core, q_tail])
        qx = np.concatenate([qx_core, qx_tail])
        qxx = c * q - nl.f(q)
        qxxx = (c - nl.df(q)) * qx

        self.x_nodes = x_nodes
        self._q = q
        self._qx = qx
        self._qxx = qxx
        self._qxxx = qxxx
        self.match_point = float(x_nodes[-1])
        self.tail_amplitude = float(q[-1] * np.exp(np.sqrt(c) * self.match_point))

    def __repr__(self):
        return f"SolitonProfile(c={self.c!r}, s0={self.s0!r}, {self.nl!r})"

    @staticmethod
    def _check_panels(a, b, n, fn, values, order, label, tol=1e-12):
        _, xs, ws = _panel_nodes(a, b, n, order + 6)
        refined = np.sum(ws * fn(xs), axis=1)
        err = np.abs(refined - values)
        worst = int(np.argmax(err))
        if err[worst] > tol * max(1.0, abs(refined[worst])):
            raise ProfileError(f"{label} quadrature not converged: panel {worst} "
                               f"of {n}, error {err[worst]:.3e}")

    # evaluation -----------------------------------------------------------

    def _interp(self, ax, y, d, s):
        nodes = self.x_nodes
        i = np.clip(np.searchsorted(nodes, ax, side="right") - 1, 0, nodes.size - 2)
        dx = nodes[i + 1] - nodes[i]
        t = (ax - nodes[i]) / dx
        return _hermite5(t, dx, y[i], d[i], s[i], y[i + 1], d[i + 1], s[i + 1])

    def _tail(self, ax):
        return self.tail_amplitude * np.exp(-np.sqrt(self.c) * ax)

    def Q(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        inside = ax < self.match_point
        out = np.empty_like(ax)
        out[inside] = self._interp(ax[inside], self._q, self._qx, self._qxx)
        out[~inside] = self._tail(ax[~inside])
        return out if out.ndim else float(out)

    def Qx(self, x):
        """Q'(x); negative for x > 0."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        inside = ax < self.match_point
        out = np.empty_like(ax)
        out[inside] = self._interp(ax[inside], self._qx, self._qxx, self._qxxx)
        qt = self._tail(ax[~inside])
        out[~inside] = -qt * np.sqrt(2.0 * self.reduced(qt))
        out = -np.sign(x) * np.abs(out)
        return out if out.ndim else float(out)

    def Qxx(self, x):
        q = self.Q(x)
        return self.c * q - self.nl.f(q)

    def eval(self, x, order: str = "Q"):
        if order == "Q":
            return self.Q(x)
        if order == "Qx":
            return self.Qx(x)
        raise ValueError(f"unknown order {order!r}")

    def on_grid(self, grid: Grid, center: float = 0.0, order: str = "Q"):
        return self.eval(grid.wrap(grid.x - center), order)

    # integrals over the real line --------------------------------------------

    def integrate(self, g) -> float:
        """Integral over R of g(Q(x)); g must vanish at 0 at least like Q^2."""
        s0 = self.s0
        core_x, core_w = self._core_quad
        tail_x, tail_w = self._tail_quad
        total = np.sum(core_w * g(s0 - core_x ** 2) * self._dx_dtau(core_x))
        total += np.sum(tail_w * g(s0 * np.exp(-tail_x)) * self._dx_dsigma(tail_x))
        # remaining tail, continued in the same variable far past the table
        sig_end = np.log(1.0 / self.tail_ratio)
        _, xs, ws = _panel_nodes(sig_end, sig_end + 80.0, 40, 10)
        total += np.sum(ws * g(s0 * np.exp(-xs)) * self._dx_dsigma(xs))
        return float(2.0 * total)

    def mass(self) -> float:
        """Integral of Q^2."""
        return self.integrate(lambda q: q * q)

    def energy(self) -> float:
        """(1/2) int Q'^2 - int F(Q), with Q'^2 = c Q^2 - 2F(Q)."""
        nl, c = self.nl, self.c
        return self.integrate(lambda q: 0.5 * c * q * q - 2.0 * nl.F(q))

    def to_csv(self, path, x=None):
        if x is None:
            x = np.linspace(-self.match_point, self.match_point, 2001)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "Q"])
            for xi, qi in zip(x, self.Q(x)):
                writer.writerow([repr(float(xi)), repr(float(qi))])


@lru_cache(maxsize=256)
def build_profile(nl: Nonlinearity, c: float) -> SolitonProfile:
    return SolitonProfile(nl, c)


def eval_profile(prof: SolitonProfile, x, order: str = "Q"):
    return prof.eval(x, order)


def closed_form_power_soliton(p: int, c: float, x, a: float = 1.0):
    """Q_c for f = a u^p: [c(p+1)/(2a) sech^2((p-1) sqrt(c) x / 2)]^(1/(p-1))."""
    arg = 0.5 * (p - 1) * np.sqrt(c) * np.asarray(x, dtype=float)
    return (c * (p + 1) / (2.0 * a) / np.cosh(arg) ** 2) ** (1.0 / (p - 1))


def dQdc(prof: SolitonProfile, grid: Grid) -> np.ndarray:
    """S_c = dQ_c/dc on the grid: L_c S = -Q_c with S orthogonal to Q_c'.

    The singular direction is removed with a bordered system
    [[L, Q'], [Q'^T, 0]] so that the solution is the one orthogonal to the
    discrete kernel.
    """
    if grid.h > 1.0 / 16.0:
        raise ValueError("grid too coarse for dQdc: need h <= 1/16")
    from .spectral import assemble_L

    op = assemble_L(prof, grid)
    return op.solve_orthogonal(-prof.on_grid(grid), prof.on_grid(grid, order="Qx"))


def verify_decay(prof: SolitonProfile, x_max: float, n: int = 4001):
    """(min, max) over x in [0, x_max] of Q(x) exp(sqrt(c) x)."""
    if x_max <= prof.match_point:
        raise ValueError("x_max must exceed the match point")
    x = np.linspace(0.0, x_max, n)
    ratio = prof.Q(x) * np.exp(np.sqrt(prof.c) * x)
    return float(ratio.min()), float(ratio.max())


def mass_derivative(nl: Nonlinearity, c: float, delta: float = 1e-3) -> float:
    """d/dc of int Q_c^2, by a fourth-order central difference in c."""
    m = [build_profile(nl, c + j * delta).mass() for j in (-2, -1, 1, 2)]
    return (m[0] - 8.0 * m[1] + 8.0 * m[2] - m[3]) / (12.0 * delta)
