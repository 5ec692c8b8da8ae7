"""Polynomial nonlinearities f for the gKdV equation and the scalar questions
about them: the antiderivative F, the soliton existence criterion and the
threshold speed c*(f)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

ROOT_RTOL = 1e-13
CSTAR_TOL = 1e-10
PREDICATE_SAMPLES = 4096


class ScanCeilingError(RuntimeError):
    """No zero was found below a user-supplied scan ceiling that is smaller
    than the guaranteed root bound, so absence of a zero is not proven."""


class CStarError(RuntimeError):
    """Bisection for c* ended on an inconsistent bracket."""

    def __init__(self, message, bracket):
        super().__init__(f"{message} (bracket {bracket[0]!r}..{bracket[1]!r})")
        self.bracket = bracket


@dataclass(frozen=True)
class Nonlinearity:
    """f(u) = sum_k coefficients[k] u^k with coefficients[0] = coefficients[1] = 0.

    `kind` and `params` only record how the object was built so that it can be
    written back to a configuration fragment.
    """

    coefficients: tuple
    kind: str = "polynomial"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        coeffs = np.trim_zeros(np.asarray(self.coefficients, dtype=float), "b")
        if coeffs.size < 3 or not np.all(np.isfinite(coeffs)):
            raise ValueError("nonlinearity needs a finite term of degree >= 2")
        if coeffs[0] != 0.0 or coeffs[1] != 0.0:
            raise ValueError("f(0) = f'(0) = 0 is required")
        object.__setattr__(self, "coefficients", tuple(float(x) for x in coeffs))
        if self.a <= 0:
            raise ValueError(f"leading coefficient a must be positive, got {self.a}")

    # construction -------------------------------------------------------

    @classmethod
    def pure_power(cls, p: int, a: float = 1.0) -> "Nonlinearity":
        if int(p) != p or p < 2:
            raise ValueError("p must be an integer >= 2")
        coeffs = np.zeros(int(p) + 1)
        coeffs[int(p)] = a
        return cls(tuple(coeffs), "pure_power", {"p": int(p), "a": float(a)})

    @classmethod
    def power_difference(cls, p: int, q: int, a_lead: float = 1.0,
                         a_sub: float = 1.0) -> "Nonlinearity":
        if int(p) != p or int(q) != q or not 2 <= p < q:
            raise ValueError("need integers 2 <= p < q")
        coeffs = np.zeros(int(q) + 1)
        coeffs[int(p)] = a_lead
        coeffs[int(q)] = -a_sub
        return cls(tuple(coeffs), "power_difference",
                   {"p": int(p), "q": int(q), "a_lead": float(a_lead),
                    "a_sub": float(a_sub)})

    @classmethod
    def polynomial(cls, coefficients) -> "Nonlinearity":
        """`coefficients` start at degree 2."""
        coeffs = [0.0, 0.0] + [float(x) for x in coefficients]
        return cls(tuple(coeffs), "polynomial",
                   {"coefficients": [float(x) for x in coefficients]})

    @classmethod
    def from_config(cls, cfg: dict) -> "Nonlinearity":
        kind = cfg.get("kind")
        try:
            if kind == "pure_power":
                return cls.pure_power(cfg["p"], cfg.get("a", 1.0))
            if kind == "power_difference":
                return cls.power_difference(cfg["p"], cfg["q"],
                                            cfg.get("a_lead", 1.0),
                                            cfg.get("a_sub", 1.0))
            if kind == "polynomial":
                return cls.polynomial(cfg["coefficients"])
        except KeyError as exc:
            raise ValueError(f"nonlinearity.{exc.args[0]}: missing field") from None
        raise ValueError(f"nonlinearity.kind: unknown kind {kind!r}")

    def to_config(self) -> dict:
        return {"kind": self.kind, **self.params}

    # metadata -----------------------------------------------------------

    @property
    def p(self) -> int:
        """Leading (lowest) power."""
        return next(k for k, ck in enumerate(self.coefficients) if ck != 0.0)

    @property
    def a(self) -> float:
        return self.coefficients[self.p]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __repr__(self):
        return f"Nonlinearity({self.kind}, {self.params or self.coefficients})"

    # polynomials --------------------------------------------------------

    @property
    def poly_f(self) -> Polynomial:
        return Polynomial(self.coefficients)

    @property
    def poly_F(self) -> Polynomial:
        return self.poly_f.integ()

    @property
    def poly_virial(self) -> Polynomial:
        """s f(s) - 2 F(s), built term by term (no cancellation)."""
        coeffs = np.zeros(self.degree + 2)
        for k, ck in enumerate(self.coefficients):
            coeffs[k + 1] = ck * (k - 1) / (k + 1)
        return Polynomial(coeffs)

    def f(self, s):
        return self.poly_f(_finite(s))

    def F(self, s):
        return self.poly_F(_finite(s))

    def df(self, s):
        return self.poly_f.deriv()(_finite(s))

    def d2f(self, s):
        return self.poly_f.deriv(2)(_finite(s))

    def eval(self, s, order: str = "f"):
        try:
            fn = {"f": self.f, "F": self.F, "df": self.df, "d2f": self.d2f}[order]
        except KeyError:
            raise ValueError(f"unknown order {order!r}") from None
        return fn(s)

    def virial_density(self, s):
        """s f(s) - 2 F(s)."""
        return self.poly_virial(_finite(s))


def _finite(s):
    arr = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite argument")
    return arr if arr.ndim else float(arr)


# ---------------------------------------------------------------------------
# zeros of the potential c s^2 / 2 - F(s)


def _potential_over_s2(nl: Nonlinearity, c: float) -> Polynomial:
    """c/2 - F(s)/s^2, whose positive zeros are those of c s^2/2 - F(s)."""
    coeffs = [0.5 * c] + [-ck / (k + 1) for k, ck in enumerate(nl.coefficients) if k >= 2]
    return Polynomial(coeffs)


def _root_bound(poly: Polynomial) -> float:
    """Cauchy bound: every real root has modulus below it."""
    coeffs = np.trim_zeros(poly.coef, "b")
    if coeffs.size < 2:
        return 1.0
    return 1.0 + float(np.max(np.abs(coeffs[:-1] / coeffs[-1])))


def _first_nonpositive(poly: Polynomial, s_max: float, n: int = PREDICATE_SAMPLES):
    """Smallest s in (0, s_max] with poly(s) <= 0, given poly(0) > 0.

    Sign changes are caught on a uniform scan; tangential zeros are caught by
    polishing every interior local minimum of the scan. Returns None when the
    polynomial stays positive.
    """
    s = np.linspace(0.0, s_max, n + 1)
    vals = poly(s)
    dvals = poly.deriv()(s)
    neg = np.flatnonzero(vals[1:] <= 0.0)
    first = neg[0] + 1 if neg.size else None
    limit = first if first is not None else n
    dpoly = poly.deriv()
    # derivative turning from negative to positive marks a local minimum
    turns = np.flatnonzero((dvals[:limit] < 0.0) & (dvals[1:limit + 1] >= 0.0))
    for i in turns:
        s_min = brentq(dpoly, s[i], s[i + 1], xtol=1e-300, rtol=ROOT_RTOL) \
            if dvals[i + 1] > 0 else s[i + 1]
        if poly(s_min) <= 0.0:
            lo = s[i]
            if poly(lo) <= 0.0:
                break
            if poly(s_min) == 0.0:
                return float(s_min)
            return brentq(poly, lo, s_min, xtol=1e-300, rtol=ROOT_RTOL)
    if first is None:
        return None
    if vals[first] == 0.0:
        return float(s[first])
    return brentq(poly, s[first - 1], s[first], xtol=1e-300, rtol=ROOT_RTOL)


def first_positive_zero(nl: Nonlinearity, c: float, s_max: float | None = None):
    """Smallest s0 > 0 with c s0^2 / 2 = F(s0), or None if there is none.

    The default scan ceiling is ten times the Cauchy root bound, so a None
    result is a proof of absence. A user ceiling below the bound that finds no
    zero raises ScanCeilingError instead.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    poly = _potential_over_s2(nl, c)
    bound = _root_bound(poly)
    ceiling = 10.0 * bound if s_max is None else float(s_max)
    s0 = _first_nonpositive(poly, ceiling)
    if s0 is None and ceiling < bound:
        raise ScanCeilingError(
            f"no zero below s_max={ceiling!r}; roots may exist up to {bound!r}")
    return s0


def soliton_exists(nl: Nonlinearity, c: float, s_max: float | None = None) -> bool:
    s0 = first_positive_zero(nl, c, s_max)
    return s0 is not None and c * s0 - nl.f(s0) < 0.0


def _virial_positive(nl: Nonlinearity, c: float) -> bool:
    """s f(s) - 2F(s) > 0 on (0, s0(c)]."""
    s0 = first_positive_zero(nl, c)
    if s0 is None:
        return False
    # divide out the zero of order p+1 at the origin
    reduced = Polynomial(nl.poly_virial.coef[nl.p + 1:])
    if reduced(s0) <= 0.0:
        return False
    return _first_nonpositive(reduced, s0) is None


def c_star(nl: Nonlinearity, c_max: float = 1e3, tol: float = CSTAR_TOL,
           full_output: bool = False):
    """Threshold speed c*(f): positive solitons exist exactly for 0 < c < c*.

    Bisection on the positivity of s f(s) - 2F(s) over the profile range.
    Returns inf when the predicate still holds at `c_max`. With
    `full_output` the final bracket is returned as well.
    """
    if _virial_positive(nl, c_max):
        return (math.inf, (c_max, math.inf)) if full_output else math.inf
    lo = c_max
    for _ in range(2000):
        lo *= 0.5
        if _virial_positive(nl, lo):
            break
    else:
        raise CStarError("predicate never holds", (0.0, c_max))
    hi = 2.0 * lo
    while hi - lo > tol * max(lo, 1e-300):
        mid = 0.5 * (lo + hi)
        if _virial_positive(nl, mid):
            lo = mid
        else:
            hi = mid
    if not _virial_positive(nl, lo) or _virial_positive(nl, hi):
        raise CStarError("non-monotone predicate near threshold", (lo, hi))
    value = 0.5 * (lo + hi)
    return (value, (lo, hi)) if full_output else value


def critical_amplitude(p: int, q: int, a: float) -> float:
    """Zero of s f(s) - 2F(s) for f = u^p - a u^q."""
    if not (2 <= p < q) or a <= 0:
        raise ValueError("need 2 <= p < q and a > 0")
    return ((1.0 / a) * ((q + 1) / (q - 1)) * ((p - 1) / (p + 1))) ** (1.0 / (q - p))


def c_star_closed_form(p: int, q: int, a: float) -> float:
    """c* = s0^(p-1) - a s0^(q-1) for f = u^p - a u^q."""
    s0 = critical_amplitude(p, q, a)
    return s0 ** (p - 1) - a * s0 ** (q - 1)
