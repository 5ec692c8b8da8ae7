"""Numerical laboratory for solitons of u_t + (u_xx + f(u))_x = 0."""

from .grid import Grid
from .nonlinearity import Nonlinearity, c_star
from .soliton import SolitonProfile, build_profile

__version__ = "0.1.0"

__all__ = ["Grid", "Nonlinearity", "SolitonProfile", "build_profile", "c_star"]
