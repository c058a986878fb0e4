"""Split-step time integration of the NLS and of its pseudo-conformal image.

Two equations are integrated:

* autonomous:      i u_t + Lap u + lam |u|^alpha u = 0
* nonautonomous:   i v_s + Lap v + lam (1-s)^{(alpha d - 4)/2} |v|^alpha v = 0

Both use Strang splitting.  The nonlinear substep is the exact flow of
``i u_t + c |u|^alpha u = 0``, a pointwise phase rotation.  Adjacent half
kinetic steps are fused between samples, so a step costs two FFTs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from . import grid as gr
from .grid import Field

Mode = Literal["autonomous", "nonautonomous"]


class DivergenceError(RuntimeError):
    """Raised by single-step helpers when a field stops being finite."""


@dataclass(frozen=True)
class Params:
    d: int
    alpha: float
    lam: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha > 0 required, got {self.alpha}")
        if self.d >= 3 and self.alpha >= 4.0 / (self.d - 2):
            raise ValueError(f"alpha < 4/(d-2) = {4.0 / (self.d - 2)} required in d={self.d}")
        if self.lam == 0 or not math.isfinite(self.lam):
            raise ValueError("lambda must be finite and nonzero")

    @property
    def alpha_d(self) -> float:
        return self.alpha * self.d

    @property
    def pcx_power(self) -> float:
        """Exponent p of the nonautonomous coefficient (1-s)^p."""
        return (self.alpha * self.d - 4.0) / 2.0


@dataclass
class Trajectory:
    """Sampled solution of one run.

    ``rows`` holds an ObservableRow per sample; ``fields`` maps the sample
    index to its stored Field (only for indices requested by the driver).
    """

    params: Params
    mode: Mode
    times: list[float] = field(default_factory=list)
    rows: list = field(default_factory=list)
    fields: dict[int, Field] = field(default_factory=dict)
    diverged: bool = False
    divergence_time: float | None = None
    divergence_reason: str | None = None
    domain_valid: bool = True
    invalid_since: float | None = None
    dt: float = 0.0

    def field_at(self, i: int) -> Field:
        return self.fields[i]

    @property
    def snapshot_indices(self) -> list[int]:
        return sorted(self.fields)

    @property
    def snapshots(self) -> list[tuple[float, Field]]:
        return [(self.times[i], self.fields[i]) for i in self.snapshot_indices]

    @property
    def final_field(self) -> Field:
        return self.fields[max(self.fields)]

    def series(self, name: str):
        from .observables import TimeSeries
        vals = [getattr(r, name) for r in self.rows]
        return TimeSeries(np.array(self.times), np.array(vals, dtype=float), name)


# -- elementary steps --------------------------------------------------------

def nonautonomous_weight(s: float, ds: float, p: Params) -> float:
    """Mean of (1-sigma)^q over [s, s+ds] in closed form, q = (alpha d - 4)/2."""
    if p.pcx_power == 0:
        return 1.0
    if ds == 0:
        return (1.0 - s) ** p.pcx_power
    a, b = 1.0 - s, 1.0 - s - ds
    q = p.pcx_power
    if b < 0:
        raise ValueError("substep crosses s = 1")
    if abs(q + 1.0) < 1e-14:
        return (math.log(a) - math.log(b)) / ds
    return (a ** (q + 1.0) - b ** (q + 1.0)) / ((q + 1.0) * ds)


def _phase(values: np.ndarray, coeff: float, alpha: float) -> np.ndarray:
    mod = np.abs(values)
    if alpha == 2.0:
        pw = mod * mod
    else:
        pw = mod ** alpha
    return values * np.exp(1j * coeff * pw)


def nonlinear_phase_step(f: Field, dt: float, p: Params, weight: float = 1.0) -> Field:
    """Exact flow of i u_t + lam*weight*|u|^alpha u = 0 over time dt."""
    if weight < 0:
        raise ValueError("weight must be nonnegative")
    if dt == 0:
        return f
    out = _phase(f.values, p.lam * weight * dt, p.alpha)
    if not np.all(np.isfinite(out)):
        raise DivergenceError("non-finite values in nonlinear substep")
    return Field(f.grid, out)


def strang_step(f: Field, t: float, dt: float, p: Params, mode: Mode = "autonomous") -> Field:
    if dt <= 0:
        raise ValueError("dt must be positive")
    w = 1.0 if mode == "autonomous" else nonautonomous_weight(t, dt, p)
    half = gr.free_propagate(f, 0.5 * dt)
    return gr.free_propagate(nonlinear_phase_step(half, dt, p, w), 0.5 * dt)


# -- drivers -----------------------------------------------------------------

def _steps_between(t0: float, t1: float, dt: float) -> int:
    m = (t1 - t0) / dt
    nsteps = int(round(m))
    if nsteps < 1 or abs(m - nsteps) > 1e-9 * max(1.0, m):
        raise ValueError(f"dt={dt} does not divide the interval [{t0}, {t1}]")
    return nsteps


def _snap_indices(times: Iterable[float] | None, t0: float, dt: float, nsteps: int) -> set[int] | None:
    if times is None:
        return None
    idx = set()
    for t in times:
        j = int(round((t - t0) / dt))
        if 0 <= j <= nsteps:
            idx.add(j)
    return idx


def evolve(u0: Field, t0: float, t1: float, dt: float, p: Params, sample_every: int = 1, *,
           mode: Mode = "autonomous", snapshot_times: Iterable[float] | None = None,
           store_fields: bool = True, blowup_factor: float = 1e3,
           resolvable_fraction: float = 0.25, boundary_tol: float = 1e-6) -> Trajectory:
    """Integrate from t0 to t1 with fixed step dt.

    Rows are recorded every ``sample_every`` steps and at every step index
    closest to an entry of ``snapshot_times``.  Fields are stored at the
    snapshot steps, or at every recorded step when no snapshot list is
    given and ``store_fields`` is true.

    The run stops with ``diverged`` set when a sample stops being finite or
    ||grad u|| exceeds min(blowup_factor*||grad u0||,
    resolvable_fraction*k_max*||u0||).  The second bound is the largest
    gradient a solution can carry while still being resolved on the grid.
    """
    from .observables import observe, observe_pcx

    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    if mode == "nonautonomous" and not (0.0 <= t0 and t1 < 1.0):
        raise ValueError("nonautonomous integration requires 0 <= s0 < s1 < 1")
    nsteps = _steps_between(t0, t1, dt)
    g = u0.grid
    snaps = _snap_indices(snapshot_times, t0, dt, nsteps)
    record = set(range(0, nsteps + 1, sample_every)) | {nsteps}
    if snaps is not None:
        record |= snaps

    traj = Trajectory(params=p, mode=mode, dt=dt)
    kmax2 = float(np.max(g.k2))
    mass0 = gr.l2_norm_sq(u0)
    grad0 = math.sqrt(gr.grad_norm_sq(u0))
    cap = resolvable_fraction * math.sqrt(kmax2) * math.sqrt(mass0)
    limit_sq = min(blowup_factor * grad0, cap) ** 2 if mass0 > 0 else math.inf
    norm = g.cell_volume / g.size

    half = gr.free_multiplier(g, 0.5 * dt)
    full = half * half

    def record_row(j: int, values: np.ndarray):
        t = t0 + j * dt
        f = Field(g, values)
        if mode == "autonomous":
            row = observe(f, t, p, boundary_tol=boundary_tol)
        else:
            row = observe_pcx(f, t, p, boundary_tol=boundary_tol)[2]
        traj.times.append(t)
        traj.rows.append(row)
        if (snaps is not None and j in snaps) or (snaps is None and store_fields):
            traj.fields[len(traj.times) - 1] = f
        if traj.domain_valid and not row.valid:
            traj.domain_valid = False
            traj.invalid_since = t

    def diverge(j: int, reason: str):
        traj.diverged = True
        traj.divergence_time = t0 + j * dt
        traj.divergence_reason = reason

    u = np.array(u0.values, dtype=complex)
    record_row(0, u)
    j = 0
    pending = sorted(record - {0})
    for jn in pending:
        uh = gr.fft(u) * half
        while j < jn:
            u = gr.ifft(uh)
            s = t0 + j * dt
            w = 1.0 if mode == "autonomous" else nonautonomous_weight(s, dt, p)
            u = _phase(u, p.lam * w * dt, p.alpha)
            uh = gr.fft(u)
            j += 1
            gsq = float(np.sum(g.k2 * (uh.real ** 2 + uh.imag ** 2))) * norm
            if not math.isfinite(gsq):
                diverge(j, "non-finite values")
                return traj
            if gsq > limit_sq:
                diverge(j, f"gradient norm {math.sqrt(gsq):.4g} exceeded threshold {math.sqrt(limit_sq):.4g}")
                return traj
            uh *= full if j < jn else half
        u = gr.ifft(uh)
        record_row(j, u)
    return traj


def evolve_nonautonomous(v0: Field, s0: float, s1: float, ds: float, p: Params,
                         sample_every: int = 1, **kw) -> Trajectory:
    if s1 >= 1.0:
        raise ValueError("s1 must be < 1 (the coefficient degenerates at s = 1)")
    return evolve(v0, s0, s1, ds, p, sample_every, mode="nonautonomous", **kw)


def stability_number(g: gr.Grid, dt: float) -> float:
    """dt * k_max^2; the CLI refuses runs where this exceeds pi."""
    return dt * float(np.max(g.k2))
