"""The linearized operator L_c = -d^2/dx^2 + c - f'(Q_c) on a periodic grid,
its low spectrum, the truncated ground state and the virial quadratic form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.polynomial import Polynomial

from .grid import Grid
from .nonlinearity import c_star
from .soliton import SolitonProfile

DENSE_LIMIT = 1024
EIG_TOL = 1e-14


class SpectralError(RuntimeError):
    pass


class DomainError(ValueError):
    pass


@dataclass
class EigenPair:
    lam: float
    vector: np.ndarray
    residual: float = 0.0


@dataclass
class WeightMu:
    mu: np.ndarray
    mu_prime: np.ndarray


class OperatorL:
    """-D2 + c - potential, with D2 the periodic 4th-order stencil."""

    def __init__(self, grid: Grid, c: float, potential: np.ndarray):
        self.grid = grid
        self.c = float(c)
        self.potential = np.asarray(potential, dtype=float)
        self.matrix = (-grid.fd_matrix(2)
                       + sp.diags(self.c - self.potential)).tocsc()

    def __call__(self, u):
        return self.matrix @ u

    @property
    def lower_bound(self) -> float:
        """Strict lower bound on the spectrum (-D2 is nonnegative)."""
        return self.c - float(np.max(self.potential)) - 1.0

    def rayleigh(self, u) -> float:
        return float(np.dot(u, self(u)) / np.dot(u, u))

    def residual(self, pair: EigenPair) -> float:
        v = pair.vector
        return self.grid.norm(self(v) - pair.lam * v) / self.grid.norm(v)

    def solve_orthogonal(self, rhs, kernel):
        """Solve L u = rhs with u orthogonal to `kernel` (bordered system)."""
        n = self.grid.N
        k = np.asarray(kernel, dtype=float)
        k = k / np.linalg.norm(k)
        border = sp.csc_matrix(k[:, None])
        big = sp.bmat([[self.matrix, border], [border.T, None]], format="csc")
        try:
            sol = spla.splu(big).solve(np.concatenate([rhs, [0.0]]))
        except RuntimeError as exc:
            raise SpectralError(f"bordered system is singular: {exc}") from None
        if not np.all(np.isfinite(sol)):
            raise SpectralError("bordered system is singular")
        u = sol[:n]
        return u - np.dot(u, k) * k

    def lowest(self, k: int = 3, constraints=(), dense: bool | None = None):
        """The k lowest eigenpairs, optionally restricted to the orthogonal
        complement of `constraints`."""
        n = self.grid.N
        basis = _orthonormal(constraints, n)
        if dense is None:
            dense = n <= DENSE_LIMIT
        if dense:
            A = self.matrix.toarray()
            if basis.shape[1]:
                P = np.eye(n) - basis @ basis.T
                A = P @ A @ P
                # push constrained directions far above the window
                A += (abs(self.lower_bound) + 1e6) * basis @ basis.T
            lam, vec = la.eigh(A, subset_by_index=[0, k - 1])
        else:
            sigma = self.lower_bound
            shifted = (self.matrix - sigma * sp.identity(n, format="csc")).tocsc()
            if basis.shape[1]:
                m = basis.shape[1]
                border = sp.csc_matrix(basis)
                lu = spla.splu(sp.bmat([[shifted, border], [border.T, None]],
                                       format="csc"))

                def inv(b):
                    b = b - basis @ (basis.T @ b)
                    return lu.solve(np.concatenate([b, np.zeros(m)]))[:n]
            else:
                lu = spla.splu(shifted)
                inv = lu.solve
            op = spla.LinearOperator((n, n), matvec=inv, dtype=float)
            v0 = np.ones(n) - basis @ (basis.T @ np.ones(n))
            nu, vec = spla.eigsh(op, k=k, which="LA", tol=EIG_TOL, v0=v0)
            order = np.argsort(-nu)
            lam = sigma + 1.0 / nu[order]
            vec = vec[:, order]
        pairs = []
        for j in range(k):
            v = vec[:, j] / self.grid.norm(vec[:, j])
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            pair = EigenPair(float(lam[j]), v)
            pair.residual = self._projected_residual(pair, basis)
            pairs.append(pair)
        return pairs

    def _projected_residual(self, pair, basis):
        r = self(pair.vector) - pair.lam * pair.vector
        if basis.shape[1]:
            r = r - basis @ (basis.T @ r)
        return self.grid.norm(r)


def _orthonormal(vectors, n):
    if len(vectors) == 0:
        return np.zeros((n, 0))
    q, r = np.linalg.qr(np.column_stack(vectors))
    if np.min(np.abs(np.diag(r))) < 1e-12 * np.max(np.abs(np.diag(r))):
        raise SpectralError("constraints are linearly dependent")
    return q


def check_domain(c: float, grid: Grid, tol: float = 1e-12):
    if math.exp(-math.sqrt(c) * grid.L / 2) >= tol:
        raise DomainError(f"domain L={grid.L:g} too small for c={c:g}: "
                          f"need exp(-sqrt(c) L/2) < {tol:g}")


def assemble_L(prof: SolitonProfile, grid: Grid) -> OperatorL:
    check_domain(prof.c, grid)
    q = prof.on_grid(grid)
    return OperatorL(grid, prof.c, prof.nl.df(q))


def assemble_Ltilde(c: float, p: int, grid: Grid) -> OperatorL:
    """-d^2 + (c/4)(p+1)^2 - (c/4)(p+1)(p+3) sech^2(sqrt(c) x).

    Its ground state is cosh^{-(p+1)/2}(sqrt(c) x) with eigenvalue 0.
    """
    if p < 2 or c <= 0:
        raise ValueError("need p >= 2 and c > 0")
    well = 0.25 * c * (p + 1) * (p + 3) / np.cosh(math.sqrt(c) * grid.x) ** 2
    return OperatorL(grid, 0.25 * c * (p + 1) ** 2, well)


def ground_state(op: OperatorL, dense: bool | None = None) -> EigenPair:
    """(-lambda0, chi~): the unique negative eigenvalue and its positive
    unit eigenvector."""
    pairs = op.lowest(2, dense=dense)
    g = pairs[0]
    if pairs[1].lam - g.lam < 1e-8 * max(1.0, abs(g.lam)):
        raise SpectralError("ground state is degenerate")
    v = g.vector
    significant = np.abs(v) > 1e-10 * np.max(np.abs(v))
    if np.any(v[significant] < 0):
        raise SpectralError("ground state changes sign")
    return g


# ---------------------------------------------------------------------------
# truncation of the ground state


def smoothstep(t):
    """Quintic C^2 step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def cutoff(y):
    """Even C^2 bump: 1 on |y| <= 1, 0 on |y| >= 2."""
    return 1.0 - smoothstep(np.abs(y) - 1.0)


# sup |phi'| and sup |phi''| of the cutoff, from the quintic on [0, 1]
CUTOFF_D1_MAX = 15.0 / 8.0
CUTOFF_D2_MAX = 10.0 / math.sqrt(3.0)


def default_B(c: float, margin: float = 1e-4) -> float:
    """Smallest integer B with exp(-sqrt(c) B) <= margin."""
    return float(math.ceil(math.log(1.0 / margin) / math.sqrt(c) - 1e-12))


def truncate_chi(pair: EigenPair, B: float, op: OperatorL, Q=None):
    """chi = chi~ * phi(x / B), with the checks int chi Q > 0 and
    lambda0 / 2 <= -<L chi, chi> / <chi, chi> <= lambda0.

    Returns (chi, quotient).
    """
    grid = op.grid
    chi = pair.vector * cutoff(grid.x / B)
    lam0 = -pair.lam
    quotient = -op.rayleigh(chi)
    if Q is not None and grid.inner(chi, Q) <= 0:
        raise SpectralError("int chi Q <= 0")
    if not 0.5 * lam0 - 1e-12 <= quotient <= lam0 + 1e-10 * lam0:
        raise SpectralError(f"B={B:g} too small: quotient {quotient:.6g} not in "
                            f"[{0.5 * lam0:.6g}, {lam0:.6g}]")
    return chi, quotient


def constrained_coercivity(op: OperatorL, constraints, dense: bool | None = None):
    """Minimum of <Lu,u>/<u,u> over u orthogonal to `constraints`.

    Returns (lambda1, minimizer). A non-positive value is returned, not
    raised; callers decide.
    """
    pair = op.lowest(1, constraints=constraints, dense=dense)[0]
    return pair.lam, pair.vector


# ---------------------------------------------------------------------------
# virial weight and quadratic form


def _mu_prime_poly(nl) -> Polynomial:
    """(s f(s) - 2F(s)) / s^2 as a polynomial."""
    return Polynomial(nl.poly_virial.coef[2:])


def mu_values(prof: SolitonProfile, z):
    """(mu, mu') at points z, with mu = -Q'/Q and mu' = (Q f(Q) - 2F(Q)) / Q^2.

    By the first integral -Q'/Q = sign(z) sqrt(c - 2F(Q)/Q^2), which is used
    so that the tail needs no division by small numbers.
    """
    z = np.asarray(z, dtype=float)
    q = prof.Q(z)
    mu = np.sign(z) * np.sqrt(np.maximum(2.0 * prof.reduced(q), 0.0))
    return mu, _mu_prime_poly(prof.nl)(q)


def mu_weight(prof: SolitonProfile, grid: Grid, center: float = 0.0,
              check: bool = True) -> WeightMu:
    """mu and mu' sampled on the grid, centered at `center`."""
    mu, mup = mu_values(prof, grid.wrap(grid.x - center))
    if check and not np.all(mup > 0):
        raise SpectralError("mu' is not positive: c is not below c*")
    return WeightMu(mu, mup)


def virial_form(op: OperatorL, w, mu: WeightMu) -> float:
    """-int w_x L(w mu), from the operator action."""
    g = op.grid
    return -g.inner(g.fd_diff1(w), op(w * mu.mu))


def _check_support(w, Q, floor=1e-10, tol=1e-12):
    outside = Q <= floor
    if np.any(outside) and np.max(np.abs(w[outside])) > tol * np.max(np.abs(w)):
        raise ValueError("w is not supported where Q > 1e-10")


def virial_identity_check(op: OperatorL, w, mu: WeightMu, Q):
    """Both sides of -int w_x L(w mu) = (3/2) int (z')^2 Q^2 mu', z = w/Q.

    The right side uses z' Q = w' + mu w, which avoids dividing by Q.
    """
    g = op.grid
    _check_support(w, Q)
    lhs = virial_form(op, w, mu)
    zq = g.fd_diff1(w) + mu.mu * w
    rhs = 1.5 * g.integrate(zq * zq * mu.mu_prime)
    return lhs, rhs


def envelope_constant(prof: SolitonProfile, grid: Grid, mu: WeightMu | None = None):
    """(min, max) of mu'(x) cosh^{p-1}(sqrt(c) x) over the resolved range."""
    mu = mu or mu_weight(prof, grid)
    x = grid.wrap(grid.x)
    keep = np.abs(x) < prof.match_point
    env = mu.mu_prime[keep] * np.cosh(math.sqrt(prof.c) * x[keep]) ** (prof.nl.p - 1)
    return float(env.min()), float(env.max())


def measure_lambda2(prof: SolitonProfile, grid: Grid, chi, mu: WeightMu | None = None,
                    floor: float = 1e-10):
    """Largest lambda with form(w) >= lambda int w^2 mu' - (int w chi)^2 / lambda
    for all w supported where Q > floor.

    Returns (lambda2, direct): `direct` is that largest lambda, `lambda2` is
    it capped by the envelope constants so one value serves both roles.

    In y = W^{1/2} z (W = Q^2 mu') the form is (3/2) int (y' - g y)^2 with
    g = (log W^{1/2})', int w^2 mu' = int y^2 and int w chi = int y chi/sqrt(mu').
    """
    mu = mu or mu_weight(prof, grid)
    x = grid.wrap(grid.x)
    q = prof.Q(x)
    idx = np.flatnonzero(q > floor * prof.s0)
    h = grid.h
    R = _mu_prime_poly(prof.nl)
    qr = q[idx]
    g_fn = -mu.mu[idx] * (1.0 + qr * R.deriv()(qr) / (2.0 * R(qr)))
    n = idx.size
    D1 = sp.diags([1 / 12, -8 / 12, 8 / 12, -1 / 12], [-2, -1, 1, 2], shape=(n, n)) / h
    T = (D1 - sp.diags(g_fn)).tocsr()
    # mass matrix scaled to the identity: form = y^T A y, (int w chi)^2 = (c.y)^2
    A = (1.5 * (T.T @ T)).todia()
    cvec = math.sqrt(h) * chi[idx] / np.sqrt(mu.mu_prime[idx])
    bw = 4
    upper = np.zeros((bw + 1, n))
    for off in range(bw + 1):
        diag = A.diagonal(off)
        upper[bw - off, off:] = diag
    ev = la.eig_banded(upper, eigvals_only=True, select="i", select_range=(0, 1))
    full = np.zeros((2 * bw + 1, n))
    full[:bw + 1] = upper
    for off in range(1, bw + 1):
        full[bw + off, :n - off] = A.diagonal(-off)

    def ok(lam):
        # A - lam I + c c^T / lam >= 0, via the secular function on (ev0, ev1)
        if lam <= ev[0]:
            return True
        if lam >= ev[1]:
            return False
        shifted = full.copy()
        shifted[bw] -= lam
        resolvent = la.solve_banded((bw, bw), shifted, cvec)
        return 1.0 + np.dot(cvec, resolvent) / lam <= 0.0

    lo, hi = max(ev[0], 1e-300), ev[1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    env_lo, env_hi = envelope_constant(prof, grid, mu)
    return float(min(lo, env_lo, 1.0 / env_hi)), float(lo)


def virial_lower_bound(op: OperatorL, mu: WeightMu, chi, w, lam2: float):
    """(form, bound) with bound = lam2 int w^2 mu' - (int w chi)^2 / lam2."""
    g = op.grid
    form = virial_form(op, w, mu)
    bound = lam2 * g.integrate(w * w * mu.mu_prime) - g.inner(w, chi) ** 2 / lam2
    return form, bound


# ---------------------------------------------------------------------------
# report


@dataclass
class SpectralReport:
    c: float
    lambda0: float
    lambda1: float
    lambda2_measured: float
    B: float
    residuals: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def spectral_report(prof: SolitonProfile, grid: Grid, B: float | None = None,
                    constraint_mode: str = "dual") -> SpectralReport:
    """Ground state, constrained coercivity and lambda2 for one (f, c)."""
    if prof.c >= c_star(prof.nl):
        raise SpectralError("c must be below c*")
    B = default_B(prof.c) if B is None else B
    op = assemble_L(prof, grid)
    gs = ground_state(op)
    Q = prof.on_grid(grid)
    Qx = prof.on_grid(grid, order="Qx")
    chi, quotient = truncate_chi(gs, B, op, Q)
    if constraint_mode == "dual":
        cons = [Qx, op(chi)]
    elif constraint_mode == "ground":
        cons = [Qx, gs.vector]
    else:
        raise ValueError(f"unknown constraint mode {constraint_mode!r}")
    lam1, _ = constrained_coercivity(op, cons)
    mu = mu_weight(prof, grid)
    lam2, _ = measure_lambda2(prof, grid, chi, mu)
    return SpectralReport(
        c=prof.c, lambda0=-gs.lam, lambda1=lam1, lambda2_measured=lam2, B=B,
        residuals={"ground": gs.residual,
                   "kernel": grid.norm(op(Qx)) / grid.norm(Qx),
                   "chi_quotient": quotient})
