"""Scalar diagnostics of NLS fields and of sampled trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Literal

import numpy as np

from . import grid as gr
from .grid import Field

if TYPE_CHECKING:
    from .dynamics import Params

ROW_COLUMNS = ("t", "mass", "energy", "grad_l2_sq", "l_alpha2", "variance",
               "pt_norm_sq", "n_monitor", "e1", "e2", "boundary_fraction")


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class ObservableRow:
    t: float
    mass: float
    energy: float
    grad_l2_sq: float
    l_alpha2: float
    variance: float
    pt_norm_sq: float
    n_monitor: float | None
    e1: float | None = None
    e2: float | None = None
    boundary_fraction: float = 0.0
    valid: bool = True

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in ROW_COLUMNS)


@dataclass(frozen=True)
class TimeSeries:
    t: np.ndarray
    values: np.ndarray
    tag: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1D arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.t.size

    def window(self, t_lo: float, t_hi: float) -> "TimeSeries":
        m = (self.t >= t_lo) & (self.t <= t_hi)
        return TimeSeries(self.t[m], self.values[m], self.tag)


# -- P_t = x + 2it grad ------------------------------------------------------

def chirp_resolved(g: gr.Grid, c: float) -> bool:
    """True when the chirp exp(-i|x|^2/4c) fits in half the spectral band."""
    return g.half_length / (2.0 * abs(c)) <= 0.5 * g.k_nyquist


def weighted_gradient(f: Field, c: float, route: Literal["auto", "phase", "direct"] = "auto") -> list[np.ndarray]:
    """Components of (x + 2ic grad) f.

    The phase route uses (x + 2ic grad) f = 2ic e^{i|x|^2/4c} grad(e^{-i|x|^2/4c} f),
    which avoids cancellation between x f and 2ic grad f for dispersed
    fields.  It needs the chirp to be resolved, so "auto" falls back to the
    direct sum for small |c|.
    """
    g = f.grid
    if c == 0:
        return [np.broadcast_to(x, g.shape) * f.values for x in g.coords]
    if route == "auto":
        route = "phase" if chirp_resolved(g, c) else "direct"
    if route == "direct":
        grads = gr.gradient(f)
        return [x * f.values + 2j * c * dg for x, dg in zip(g.coords, grads)]
    chirp = np.exp(-1j * g.r2 / (4.0 * c))
    grads = gr.gradient(Field(g, chirp * f.values))
    return [2j * c * np.conj(chirp) * dg for dg in grads]


def weighted_norm_sq(f: Field, c: float, route: str = "auto") -> float:
    """||(x + 2ic grad) f||_2^2."""
    return sum(gr.l2_norm_sq(comp, f.grid) for comp in weighted_gradient(f, c, route))


def pt_norm_sq(f: Field, t: float, route: str = "auto") -> float:
    return weighted_norm_sq(f, t, route)


def variance(f: Field) -> float:
    return float(np.sum(f.grid.r2 * np.abs(f.values) ** 2) * f.grid.cell_volume)


def potential_integral(f: Field, alpha: float) -> float:
    """||f||_{alpha+2}^{alpha+2}."""
    return float(np.sum(np.abs(f.values) ** (alpha + 2.0)) * f.grid.cell_volume)


def mass(f: Field) -> float:
    return gr.l2_norm_sq(f)


def energy(f: Field, p: "Params") -> float:
    return 0.5 * gr.grad_norm_sq(f) - p.lam / (p.alpha + 2.0) * potential_integral(f, p.alpha)


def n_monitor(t: float, pt_sq: float, pot: float, p: "Params") -> float | None:
    """t^{ad/2-2}||P_t u||^2 - 8 lam/(a+2) t^{ad/2} ||u||^{a+2}; None where undefined."""
    e = p.alpha * p.d / 2.0
    if t == 0 and e < 2.0:
        return None
    tp = 1.0 if e == 2.0 else abs(t) ** (e - 2.0)
    return tp * pt_sq - 8.0 * p.lam / (p.alpha + 2.0) * abs(t) ** e * pot


def observe(f: Field, t: float, p: "Params", *, boundary_tol: float = 1e-6,
            pt_route: str = "auto") -> ObservableRow:
    m = mass(f)
    if m == 0.0:
        return ObservableRow(t, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, boundary_fraction=0.0)
    gsq = gr.grad_norm_sq(f)
    pot = potential_integral(f, p.alpha)
    ptsq = pt_norm_sq(f, t, pt_route)
    bf = gr.boundary_mass_fraction(f)
    return ObservableRow(
        t=t, mass=m,
        energy=0.5 * gsq - p.lam / (p.alpha + 2.0) * pot,
        grad_l2_sq=gsq,
        l_alpha2=pot ** (1.0 / (p.alpha + 2.0)),
        variance=variance(f),
        pt_norm_sq=ptsq,
        n_monitor=n_monitor(t, ptsq, pot, p),
        boundary_fraction=bf,
        valid=bf <= boundary_tol,
    )


def pcx_energies(grad_sq: float, pot: float, s: float, p: "Params") -> tuple[float, float]:
    q = p.pcx_power
    c = p.lam / (p.alpha + 2.0) * pot
    e1 = 0.5 * grad_sq - (1.0 - s) ** q * c
    e2 = (1.0 - s) ** (-q) * 0.5 * grad_sq - c
    return e1, e2


def observe_pcx(v: Field, s: float, p: "Params", *, boundary_tol: float = 1e-6):
    """E1(s), E2(s) and the observable row of v(s) (time column holds s)."""
    if not 0.0 <= s < 1.0:
        raise ValueError("s must lie in [0, 1)")
    row = observe(v, s, p, boundary_tol=boundary_tol)
    e1, e2 = pcx_energies(row.grad_l2_sq, row.l_alpha2 ** (p.alpha + 2.0), s, p)
    row = replace(row, e1=e1, e2=e2)
    return e1, e2, row


def pcx_energy_derivatives(grad_sq: float, pot: float, s: float, p: "Params") -> tuple[float, float]:
    """Exact right-hand sides of dE1/ds and dE2/ds."""
    ad = p.alpha * p.d
    de1 = -(1.0 - s) ** ((ad - 6.0) / 2.0) * (4.0 - ad) / 2.0 * p.lam / (p.alpha + 2.0) * pot
    de2 = (1.0 - s) ** ((2.0 - ad) / 2.0) * (ad - 4.0) / 4.0 * grad_sq
    return de1, de2


# -- trajectory-level estimators --------------------------------------------

def _check_positive_times(series: TimeSeries) -> None:
    if len(series) == 0:
        raise InsufficientData("empty series")
    if np.any(series.t <= 0):
        raise ValueError("series times must be positive")


def weak_lorentz_time_norm(series: TimeSeries, a: float) -> float:
    """max_i value_i * t_i^{1/a}; exact for non-increasing series."""
    if a <= 0:
        raise ValueError("a must be positive")
    _check_positive_times(series)
    return float(np.max(series.values * series.t ** (1.0 / a)))


def xinfty_norm(series: TimeSeries, beta: float) -> float:
    _check_positive_times(series)
    return float(np.max(series.t ** beta * series.values))


def geometric_ladder(t_max: float, n_samples: int, t_min: float | None = None) -> np.ndarray:
    """n_samples times spaced geometrically in (0, t_max], ending at t_max."""
    if t_max <= 0 or n_samples < 2:
        raise ValueError("need t_max > 0 and n_samples >= 2")
    if t_min is None:
        t_min = t_max * 2.0 ** (-(n_samples - 1) / 4.0)
    return np.geomspace(t_min, t_max, n_samples)


def winfty_norm(u0: Field, g: gr.Grid, T: float, n_samples: int, beta: float,
                p_exp: float | None = None, alpha: float | None = None,
                t_min: float | None = None) -> float:
    """Finite-horizon estimate of sup_t t^beta ||e^{it Lap} u0||_{alpha+2}.

    The Lebesgue exponent is ``p_exp`` if given, else ``alpha + 2``.
    Samples lie on the geometric ladder from ``t_min`` (default T*1e-4) to T.
    """
    if u0.grid != g:
        raise ValueError("u0 must live on g")
    if p_exp is None:
        if alpha is None:
            raise ValueError("give alpha or p_exp")
        p_exp = alpha + 2.0
    if T <= 0 or n_samples < 2:
        raise ValueError("need T > 0 and n_samples >= 2")
    if not np.any(u0.values):
        return 0.0
    ladder = np.geomspace(t_min if t_min is not None else T * 1e-4, T, n_samples)
    uh = gr.fft(u0.values)
    best = 0.0
    for t in ladder:
        val = gr.lp_norm(Field(g, gr.ifft(uh * gr.free_multiplier(g, t))), p_exp)
        best = max(best, t ** beta * val)
    return best


def fit_decay_exponent(series: TimeSeries, window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Least-squares fit of value ~ C t^{-p}; returns (p, r^2)."""
    s = series if window is None else series.window(*window)
    m = (s.t > 0) & (s.values > 0)
    if np.count_nonzero(m) < 5:
        raise InsufficientData("need at least 5 positive samples in the window")
    lt, lv = np.log(s.t[m]), np.log(s.values[m])
    slope, icpt = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + icpt)
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-28 * max(1.0, lv.size) else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(-slope), r2


def last_decade_geometric(series: TimeSeries, per_decade: int = 12) -> TimeSeries:
    """Geometric subsample of the final decade, used for decay fits."""
    t_end = series.t[-1]
    targets = np.geomspace(t_end / 10.0, t_end, per_decade)
    idx = sorted({int(np.argmin(np.abs(series.t - tt))) for tt in targets})
    return TimeSeries(series.t[idx], series.values[idx], series.tag)
