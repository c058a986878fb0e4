"""Initial-data families, including chirped ("oscillating") data.

For a chirp of rate b the free flow has the closed form

    e^{it Lap}(e^{ib|x|^2/4} phi)
        = e^{ib|x|^2/(4(1+bt))} D_{1/(1+bt)} e^{i t/(1+bt) Lap} phi,

with D_beta w(x) = beta^{d/2} w(beta x).  The dilation is realized on a
companion grid of half-length L/(1+bt) whose sample j sits at x_j/(1+bt).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import grid as gr
from .grid import Field, Grid
from .observables import weighted_gradient

Family = Literal["gaussian", "soliton", "oscillating", "custom"]

# |phi| below this fraction of its peak counts as outside the support.
SUPPORT_LEVEL = 1e-13


@dataclass(frozen=True)
class DataSpec:
    family: Family = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    b: float = 0.0
    base: "DataSpec | None" = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.family == "oscillating" and self.base is None:
            raise ValueError("oscillating data needs a base spec")


def gaussian(g: Grid, amplitude: float = 1.0, width: float = 1.0) -> Field:
    if width <= 0:
        raise ValueError("width must be positive")
    if width > g.half_length / 4.0:
        warnings.warn("Gaussian width exceeds L/4; boundary contamination likely", RuntimeWarning)
    return Field(g, amplitude * np.exp(-g.r2 / (2.0 * width ** 2)))


def pcx_phase(f: Field, sign: int = -1) -> Field:
    """Multiply by exp(sign * i|x|^2/4)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return Field(f.grid, f.values * np.exp(sign * 1j * f.grid.r2 / 4.0))


def quadratic_phase(f: Field, b: float) -> Field:
    return Field(f.grid, f.values * np.exp(1j * b * f.grid.r2 / 4.0))


def support_radius(f: Field, level: float = SUPPORT_LEVEL) -> float:
    """Largest sup-norm radius where |f| reaches level * max|f|."""
    mod = np.abs(f.values)
    peak = mod.max()
    if peak == 0:
        return 0.0
    radius = np.zeros(f.grid.shape)
    for c in f.grid.coords:
        radius = np.maximum(radius, np.abs(c))
    return float(radius[mod >= level * peak].max())


def chirp_resolved(phi: Field, b: float) -> bool:
    """Nyquist check for e^{ib|x|^2/4} phi: b * R * dx < pi over phi's support."""
    return abs(b) * support_radius(phi) * phi.grid.dx < math.pi


def oscillating_data(phi: Field, b: float, boundary_tol: float = 1e-6) -> Field:
    """e^{i Lap}(e^{ib|x|^2/4} phi)."""
    if gr.boundary_mass_fraction(phi) > boundary_tol:
        raise ValueError("phi is not contained in the core of the grid")
    if not chirp_resolved(phi, b):
        raise ValueError(f"quadratic phase with b={b} is not resolved on this grid")
    return gr.free_propagate(quadratic_phase(phi, b), 1.0)


def dilated_free_flow(phi: Field, b: float, t: float) -> Field:
    """Right-hand side of the chirp identity, sampled on phi's grid."""
    scale = 1.0 + b * t
    if scale <= 0:
        raise ValueError("1 + b t must be positive")
    g = phi.grid
    tau = t / scale
    comp = g.rescaled(1.0 / scale)
    w = gr.free_propagate(gr.resample(phi, comp), tau)
    vals = scale ** (-g.d / 2.0) * w.values * np.exp(1j * b * g.r2 / (4.0 * scale))
    return Field(g, vals)


def oscillating_identity_residual(phi: Field, b: float, t: float) -> float:
    """Relative L2 gap between the two sides of the chirp identity."""
    if 1.0 + b * t <= 0:
        raise ValueError("1 + b t must be positive (caustic)")
    lhs = gr.free_propagate(quadratic_phase(phi, b), t)
    rhs = dilated_free_flow(phi, b, t)
    den = gr.l2_norm(lhs)
    return 0.0 if den == 0 else gr.l2_norm(lhs - rhs) / den


def oscillating_exponents(d: int, alpha: float) -> tuple[float, float]:
    """(mu0, nu0) used for the chirped-data decay estimate."""
    mu0 = 4.0 * (d + 2) * (alpha + 2.0) / (alpha * d * d)
    nu0 = (d + 2) * (alpha + 2.0) / (alpha + d + 2.0)
    return mu0, nu0


def oscillating_estimator(phi: Field, b: float, alpha: float, T: float = 100.0, n_samples: int = 64) -> float:
    """Finite-horizon value of

        sup_{0<=t<=T} (1+t)^{2/mu0} ( ||e^{it Lap} P ub||_nu0 + ||e^{it Lap} ub||_nu0 )

    for ub = oscillating_data(phi, b) and P = x + 2i grad.  By the chirp
    identity both norms reduce to free flows of phi and x phi over the
    short time tau = (1+t)/(1+b(1+t)), with an explicit dilation factor.
    """
    if b < 0:
        raise ValueError("b must be nonnegative")
    d = phi.grid.d
    mu0, nu0 = oscillating_exponents(d, alpha)
    r = 2.0 / mu0
    xphi = [Field(phi.grid, comp) for comp in weighted_gradient(phi, 0.0)]
    best = 0.0
    for t in np.concatenate([[0.0], np.geomspace(1e-3, T, n_samples - 1)]):
        s = 1.0 + t
        scale = 1.0 + b * s
        tau = s / scale
        fac = scale ** (-d * (0.5 - 1.0 / nu0))
        norm_phi = gr.lp_norm(gr.free_propagate(phi, tau), nu0)
        norm_xphi = _vector_lp([gr.free_propagate(c, tau) for c in xphi], nu0)
        best = max(best, s ** r * fac * (norm_xphi + norm_phi))
    return best


def oscillating_estimator_direct(phi: Field, b: float, alpha: float, T: float = 100.0, n_samples: int = 64) -> float:
    """Same quantity evaluated by propagating the chirped data on the grid.

    Only usable while the propagated field stays inside the box.
    """
    d = phi.grid.d
    mu0, nu0 = oscillating_exponents(d, alpha)
    ub = oscillating_data(phi, b)
    pu = [Field(phi.grid, c) for c in weighted_gradient(ub, 1.0, "direct")]
    best = 0.0
    for t in np.concatenate([[0.0], np.geomspace(1e-3, T, n_samples - 1)]):
        n1 = _vector_lp([gr.free_propagate(c, t) for c in pu], nu0)
        n2 = gr.lp_norm(gr.free_propagate(ub, t), nu0)
        best = max(best, (1.0 + t) ** (2.0 / mu0) * (n1 + n2))
    return best


def _vector_lp(fields: list[Field], p: float) -> float:
    """L^p norm of the Euclidean length of a vector field."""
    mod = np.sqrt(sum(np.abs(f.values) ** 2 for f in fields))
    return float((np.sum(mod ** p) * fields[0].grid.cell_volume) ** (1.0 / p))


def build(spec: DataSpec, g: Grid, alpha: float | None = None) -> Field:
    """Materialize a DataSpec on a grid.  Solitons need the power alpha."""
    if spec.family == "gaussian":
        return gaussian(g, spec.amplitude, spec.width)
    if spec.family == "soliton":
        if g.d != 1 or alpha is None:
            raise ValueError("soliton data needs d = 1 and the power alpha")
        from .groundstate import soliton_closed_form_1d
        return soliton_closed_form_1d(alpha, g).scaled(spec.amplitude)
    if spec.family == "oscillating":
        return oscillating_data(build(spec.base, g, alpha), spec.b)
    raise ValueError("custom data must be supplied as a Field")
