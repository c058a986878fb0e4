"""Pseudo-spectral simulation and scattering diagnostics for i u_t + Lap u + lam |u|^alpha u = 0."""
from .dynamics import Params, Trajectory, evolve, evolve_nonautonomous
from .grid import Field, Grid, free_propagate, make_grid
from .scattering import RunReport, classify_run

__version__ = "0.1.0"

__all__ = [
    "Field", "Grid", "Params", "RunReport", "Trajectory",
    "classify_run", "evolve", "evolve_nonautonomous", "free_propagate", "make_grid",
]
