"""Uniform periodic grid on [-L/2, L/2) with spectral and finite-difference
derivatives. Fields are plain float arrays of length N."""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

# 4th-order centered stencils, offsets -2..2
D1_STENCIL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2_STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


class Grid:
    def __init__(self, L: float, N: int):
        if not L > 0:
            raise ValueError("L must be positive")
        if N < 8 or N & (N - 1):
            raise ValueError("N must be a power of two >= 8")
        self.L = float(L)
        self.N = int(N)
        self.h = self.L / self.N

    def __repr__(self):
        return f"Grid(L={self.L:g}, N={self.N})"

    def __eq__(self, other):
        return isinstance(other, Grid) and (self.L, self.N) == (other.L, other.N)

    def __hash__(self):
        return hash((self.L, self.N))

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.L + self.h * np.arange(self.N)

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers for rfft coefficients."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.N, d=self.h)

    @cached_property
    def k_odd(self) -> np.ndarray:
        """Wavenumbers with the Nyquist mode zeroed, for odd derivatives."""
        k = self.k.copy()
        k[-1] = 0.0
        return k

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask on rfft coefficients."""
        return np.arange(self.k.size) <= self.N // 3

    def wrap(self, x):
        """Map positions into [-L/2, L/2)."""
        return (np.asarray(x) + 0.5 * self.L) % self.L - 0.5 * self.L

    # spectral calculus -------------------------------------------------

    def diff(self, u: np.ndarray, order: int = 1) -> np.ndarray:
        k = self.k_odd if order % 2 else self.k
        return np.fft.irfft((1j * k) ** order * np.fft.rfft(u), n=self.N)

    def shift(self, u: np.ndarray, d: float) -> np.ndarray:
        """u(x - d) by Fourier interpolation."""
        return np.fft.irfft(np.exp(-1j * self.k_odd * d) * np.fft.rfft(u), n=self.N)

    # finite differences (4th order, periodic) ---------------------------

    def fd_diff1(self, u: np.ndarray) -> np.ndarray:
        return sum(w * np.roll(u, -o) for w, o in zip(D1_STENCIL, range(-2, 3)) if w) / self.h

    def fd_diff2(self, u: np.ndarray) -> np.ndarray:
        return sum(w * np.roll(u, -o) for w, o in zip(D2_STENCIL, range(-2, 3))) / self.h ** 2

    def fd_matrix(self, order: int) -> sp.csr_matrix:
        stencil = {1: D1_STENCIL / self.h, 2: D2_STENCIL / self.h ** 2}[order]
        n = self.N
        rows, cols, vals = [], [], []
        idx = np.arange(n)
        for w, o in zip(stencil, range(-2, 3)):
            if w:
                rows.append(idx)
                cols.append((idx + o) % n)
                vals.append(np.full(n, w))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows),
                                                     np.concatenate(cols))), shape=(n, n))

    # quadrature --------------------------------------------------------

    def integrate(self, u) -> float:
        return float(self.h * np.sum(u))

    def inner(self, u, w) -> float:
        return float(self.h * np.dot(u, w))

    def norm(self, u) -> float:
        return float(np.sqrt(self.h * np.dot(u, u)))

    def h1_norm(self, u) -> float:
        ux = self.diff(u)
        return float(np.sqrt(self.h * (np.dot(u, u) + np.dot(ux, ux))))
