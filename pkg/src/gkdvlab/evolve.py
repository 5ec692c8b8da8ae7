"""Time integration of u_t + (u_xx + f(u))_x = 0 and of the linearized flow
eta_t = (L eta)_x on a periodic grid, plus the localized mass/energy
functionals used in monotonicity audits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .grid import Grid
from .nonlinearity import Nonlinearity

CONTOUR_POINTS = 32


class BlowUpError(RuntimeError):
    """Non-finite values appeared; `state` is the last finite field."""

    def __init__(self, message, state, t):
        super().__init__(message)
        self.state = state
        self.t = t


def sponge_profile(grid: Grid, width: float, strength: float = 1.0) -> np.ndarray:
    """Damping rate, zero in the interior and rising as sin^2 over the last
    `width` units at both ends."""
    if width <= 0 or strength == 0:
        return np.zeros(grid.N)
    edge = np.abs(grid.x) - (0.5 * grid.L - width)
    ramp = np.clip(edge / width, 0.0, 1.0)
    return strength * np.sin(0.5 * np.pi * ramp) ** 2


def etdrk4_coefficients(symbol: np.ndarray, dt: float, m: int = CONTOUR_POINTS):
    """E, E2, Q, f1, f2, f3 for the linear symbol (complex) and step dt,
    with phi-functions evaluated by contour means to avoid cancellation."""
    lh = dt * symbol
    r = np.exp(2j * np.pi * (np.arange(1, m + 1) - 0.5) / m)
    lr = lh[:, None] + r[None, :]
    e_lr = np.exp(lr)
    Q = dt * np.mean((np.exp(0.5 * lr) - 1.0) / lr, axis=1)
    f1 = dt * np.mean((-4.0 - lr + e_lr * (4.0 - 3.0 * lr + lr ** 2)) / lr ** 3, axis=1)
    f2 = dt * np.mean((2.0 + lr + e_lr * (lr - 2.0)) / lr ** 3, axis=1)
    f3 = dt * np.mean((-4.0 - 3.0 * lr - lr ** 2 + e_lr * (4.0 - lr)) / lr ** 3, axis=1)
    return np.exp(lh), np.exp(0.5 * lh), Q, f1, f2, f3


class Solver:
    """ETDRK4 for u_t = -u_xxx + drift u_x - (flux(u))_x - sponge u.

    `drift` is the frame speed for the full equation (u is then a function of
    x - drift t) or c0 for the linearized flow. The linear part is advanced
    exactly in Fourier space; `flux` is a pointwise function of the physical
    field, dealiased by the 2/3 rule.
    """

    def __init__(self, grid: Grid, dt: float, flux, drift: float = 0.0,
                 sponge: np.ndarray | None = None):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.dt = float(dt)
        self.flux = flux
        self.drift = float(drift)
        self.sponge = sponge if sponge is not None and np.any(sponge) else None
        symbol = 1j * grid.k_odd ** 3 + 1j * self.drift * grid.k_odd
        self._coef = etdrk4_coefficients(symbol, self.dt)
        self._dx = 1j * grid.k_odd * grid.dealias_mask

    def _N(self, uh):
        u = np.fft.irfft(uh, n=self.grid.N)
        out = -self._dx * np.fft.rfft(self.flux(u))
        if self.sponge is not None:
            out -= np.fft.rfft(self.sponge * u)
        return out

    def step_hat(self, vh):
        E, E2, Q, f1, f2, f3 = self._coef
        Nv = self._N(vh)
        a = E2 * vh + Q * Nv
        Na = self._N(a)
        b = E2 * vh + Q * Na
        Nb = self._N(b)
        c = E2 * a + Q * (2.0 * Nb - Nv)
        Nc = self._N(c)
        return E * vh + f1 * Nv + 2.0 * f2 * (Na + Nb) + f3 * Nc

    def advance(self, u, n_steps: int, t0: float = 0.0, every=None, callback=None):
        """Take n_steps steps from u; `callback(t, u)` runs every `every`
        steps with the physical field. Returns the final physical field."""
        vh = np.fft.rfft(u)
        last = np.asarray(u, dtype=float).copy()
        for i in range(1, n_steps + 1):
            vh = self.step_hat(vh)
            if callback is not None and i % every == 0:
                if not np.all(np.isfinite(vh)):
                    raise BlowUpError("non-finite state", last, t0 + (i - every) * self.dt)
                last = np.fft.irfft(vh, n=self.grid.N)
                callback(t0 + i * self.dt, last)
        if not np.all(np.isfinite(vh)):
            raise BlowUpError("non-finite state", last, t0)
        return np.fft.irfft(vh, n=self.grid.N)


def nonlinear_solver(grid: Grid, dt: float, nl: Nonlinearity, frame_speed: float = 0.0,
                     sponge: np.ndarray | None = None) -> Solver:
    poly = nl.poly_f
    return Solver(grid, dt, poly, drift=frame_speed, sponge=sponge)


def linearized_solver(grid: Grid, dt: float, op, sponge: np.ndarray | None = None) -> Solver:
    """eta_t = (L eta)_x with L = -d^2 + c - f'(Q); `op` supplies c and f'(Q)."""
    pot = np.asarray(op.potential)
    return Solver(grid, dt, lambda eta: pot * eta, drift=op.c, sponge=sponge)


def step(u, dt: float, nl: Nonlinearity, grid: Grid):
    """One ETDRK4 step of the full equation."""
    return nonlinear_solver(grid, dt, nl).advance(u, 1)


def step_linearized(eta, dt: float, op):
    """One ETDRK4 step of eta_t = (L eta)_x."""
    return linearized_solver(op.grid, dt, op).advance(eta, 1)


# ---------------------------------------------------------------------------
# conserved quantities and localized functionals


def invariants(u, nl: Nonlinearity, grid: Grid):
    """(mass, energy) = (int u^2, (1/2) int u_x^2 - int F(u))."""
    ux = grid.diff(u)
    mass = grid.integrate(u * u)
    energy = 0.5 * grid.integrate(ux * ux) - grid.integrate(nl.F(u))
    return mass, energy


def psi(x):
    """(2/pi) arctan(exp(x/4)), evaluated without overflow."""
    x = np.asarray(x, dtype=float)
    neg = (2.0 / np.pi) * np.arctan(np.exp(-np.abs(x) / 4.0))
    out = np.where(x <= 0, neg, 1.0 - neg)
    return out if out.ndim else float(out)


def psi_prime(x):
    return 1.0 / (4.0 * np.pi * np.cosh(np.asarray(x, dtype=float) / 4.0))


def psi_third(x):
    y = np.asarray(x, dtype=float) / 4.0
    sech = 1.0 / np.cosh(y)
    return sech * (np.tanh(y) ** 2 - sech ** 2) / (64.0 * np.pi)


def psi0(x, t, t0, rho_t0, x0, c0):
    """psi(sqrt(c0) (x - rho(t0) + (c0/2)(t0 - t) - x0))."""
    s = math.sqrt(c0)
    return psi(s * (np.asarray(x, dtype=float) - rho_t0 + 0.5 * c0 * (t0 - t) - x0))


def functional_I(u, weight, grid: Grid) -> float:
    return grid.integrate(u * u * weight)


def functional_J(u, weight, grid: Grid, nl: Nonlinearity, c0: float) -> float:
    ux = grid.diff(u)
    return grid.integrate((ux * ux - 2.0 * nl.F(u) + c0 * u * u) * weight)


def region_weight(grid: Grid, region_left: float, center: float = 0.0):
    """1 for x - center > region_left, 0 below, linear over one cell at the
    edge (the edge node gets weight 1/2). Coordinates are periodic."""
    if region_left <= -0.5 * grid.L:
        return np.ones(grid.N)
    z = grid.wrap(grid.x - center)
    return np.clip((z - region_left) / grid.h + 0.5, 0.0, 1.0)


def local_h1_norm(u, region_left: float, grid: Grid, center: float = 0.0) -> float:
    """(int_{x - center > region_left} u_x^2 + u^2)^{1/2}."""
    ux = grid.diff(u)
    w = region_weight(grid, region_left, center)
    return math.sqrt(grid.integrate((ux * ux + u * u) * w))


# ---------------------------------------------------------------------------
# diagnostics


CSV_HEADER = ("t", "mass", "energy", "c", "rho", "eta_h1", "I", "J", "V", "local_h1")


@dataclass
class Record:
    t: float
    mass: float
    energy: float
    c: float
    rho: float
    eta_h1: float
    I: float
    J: float
    V: float
    local_h1: float


@dataclass
class DiagnosticsSeries:
    records: list = field(default_factory=list)

    def append(self, record: Record):
        if self.records and not record.t > self.records[-1].t:
            raise ValueError("times must be strictly increasing")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.records:
            writer.writerow(["%.17g" % getattr(r, f.name) for f in fields(Record)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


@dataclass
class MonotonicityReport:
    x0: float
    K_cal: float
    bound: float
    max_raw_I: float
    max_raw_J: float
    excess_I: float
    excess_J: float
    pairs: int


def monotonicity_audit(times, snapshots, rho_lab, frame_speed, grid: Grid, nl,
                       x0: float, c0: float, anchors, K_cal: float, slack: float = 1e-8):
    """Monotonicity audit: for each anchor t0 and every t <= t0 in the series,
    excess = max(0, I(t0) - I(t) - K_cal exp(-sqrt(c0) x0 / 4) - slack),
    and the same for J.

    `snapshots[i]` is the field at `times[i]` on grid coordinates y, which are
    related to lab coordinates by x = y + frame_speed t. `anchors` are t0
    values that must appear in `times`.
    """
    times = np.asarray(times)
    bound = K_cal * math.exp(-math.sqrt(c0) * x0 / 4.0)
    max_I = max_J = -math.inf
    ex_I = ex_J = 0.0
    pairs = 0
    for t0 in anchors:
        hits = np.flatnonzero(np.isclose(times, t0, rtol=0, atol=1e-9))
        if hits.size == 0:
            raise ValueError(f"anchor t0={t0} missing from the series")
        i0 = int(hits[0])
        vals_I, vals_J = [], []
        for i in range(i0 + 1):
            t = times[i]
            x_lab = grid.x + frame_speed * t
            w = psi0(x_lab, t, t0, rho_lab[i0], x0, c0)
            vals_I.append(functional_I(snapshots[i], w, grid))
            vals_J.append(functional_J(snapshots[i], w, grid, nl, c0))
        dI = vals_I[-1] - np.array(vals_I)
        dJ = vals_J[-1] - np.array(vals_J)
        max_I = max(max_I, float(dI.max()))
        max_J = max(max_J, float(dJ.max()))
        ex_I = max(ex_I, float(np.max(np.maximum(0.0, dI - bound - slack))))
        ex_J = max(ex_J, float(np.max(np.maximum(0.0, dJ - bound - slack))))
        pairs += i0 + 1
    return MonotonicityReport(x0, K_cal, bound, max_I, max_J, ex_I, ex_J, pairs)
