"""Scattering-state extraction and run classification.

Weighted norms of free-propagated profiles never multiply by x after a
free flow.  They use e^{-it Lap} P_t = x e^{-it Lap} with P_t = x + 2it grad,
so x e^{-it Lap} u(t) is obtained from P_t u(t) where u(t) is still well
inside the box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.integrate import trapezoid

from . import grid as gr
from .dynamics import Params, Trajectory
from .grid import Field
from .observables import (InsufficientData, TimeSeries, fit_decay_exponent, last_decade_geometric,
                          weak_lorentz_time_norm, weighted_gradient)
from .thresholds import ExponentTable

Verdict = Literal["Scattered", "BlowupDetected", "NonScattering", "Inconclusive"]

DEFAULT_REL_TOL = 1e-4
PLATEAU_SLOPE = 0.05
RESOLUTION_TOL = 1e-10


class InsufficientSamples(ValueError):
    pass


class InsufficientHorizon(ValueError):
    pass


@dataclass(frozen=True)
class SigmaNorm:
    h1_part: float
    weight_part: float

    @property
    def total(self) -> float:
        return math.hypot(self.h1_part, self.weight_part)


def inverse_free_profile(f: Field, t: float) -> Field:
    """e^{-it Lap} f."""
    return gr.free_propagate(f, -t)


def _h1_sq_hat(fh: np.ndarray, g: gr.Grid) -> float:
    return float(np.sum((1.0 + g.k2) * np.abs(fh) ** 2)) * g.cell_volume / g.size


def _l2_sq_hat(fh: np.ndarray, g: gr.Grid) -> float:
    return float(np.sum(np.abs(fh) ** 2)) * g.cell_volume / g.size


class _Profile:
    """Spectral data of e^{-it Lap}u(t) and of x e^{-it Lap}u(t) = e^{-it Lap}P_t u(t)."""

    def __init__(self, u: Field, t: float):
        g = u.grid
        back = gr.free_multiplier(g, -t)
        self.t = t
        self.hat = gr.fft(u.values) * back
        self.xhat = [gr.fft(c) * back for c in weighted_gradient(u, t)]


def sigma_norm(f: Field, t: float = 0.0) -> SigmaNorm:
    """Sigma norm of e^{-it Lap} f (the plain Sigma norm of f when t = 0)."""
    p = _Profile(f, t)
    g = f.grid
    return SigmaNorm(math.sqrt(_h1_sq_hat(p.hat, g)), math.sqrt(sum(_l2_sq_hat(x, g) for x in p.xhat)))


def _sigma_diff(a: _Profile, b: _Profile, g: gr.Grid) -> SigmaNorm:
    h1 = _h1_sq_hat(a.hat - b.hat, g)
    w = sum(_l2_sq_hat(xa - xb, g) for xa, xb in zip(a.xhat, b.xhat))
    return SigmaNorm(math.sqrt(h1), math.sqrt(w))


def _profiles(traj: Trajectory) -> list[_Profile]:
    return [_Profile(f, t) for t, f in traj.snapshots]


def cauchy_series(traj: Trajectory, parts: bool = False):
    """Sigma increments of e^{-it Lap}u(t) between consecutive stored samples.

    With ``parts`` the H1 and weighted parts are returned as two extra series.
    """
    if traj.diverged:
        raise InsufficientSamples("trajectory diverged")
    snaps = traj.snapshots
    if len(snaps) < 3:
        raise InsufficientSamples("need at least 3 stored samples")
    profs = _profiles(traj)
    g = snaps[0][1].grid
    diffs = [_sigma_diff(profs[i + 1], profs[i], g) for i in range(len(profs) - 1)]
    ts = np.array([t for t, _ in snaps[1:]])
    total = TimeSeries(ts, np.array([dd.total for dd in diffs]), "cauchy_increment")
    if not parts:
        return total
    return (total, TimeSeries(ts, np.array([dd.h1_part for dd in diffs]), "cauchy_h1"),
            TimeSeries(ts, np.array([dd.weight_part for dd in diffs]), "cauchy_weight"))


def pcx_profile(u: Field, t: float) -> tuple[Field, float]:
    """e^{-is Lap} v(s) for the pcx image v of u(t), on v's companion grid.

    It satisfies e^{-it Lap} u(t) = e^{i|y|^2/4} e^{-is Lap} v(s), so it
    carries the same limit information as the scattering profile.
    """
    from .pcx import to_pcx
    pair = to_pcx(u, t)
    return gr.free_propagate(pair.v_field, -pair.s), pair.s


def pcx_cauchy_series(traj: Trajectory) -> TimeSeries:
    """H1 increments of e^{-is Lap} v(s) between consecutive stored samples.

    The free part of the s-flow is removed so that only the nonlinear
    drift is measured.  Each profile lives on its own companion grid, so
    consecutive profiles are compared on the later (smaller) grid.
    """
    snaps = traj.snapshots
    if len(snaps) < 3:
        raise InsufficientSamples("need at least 3 stored samples")
    ws = [pcx_profile(u, t) for t, u in snaps]
    out = []
    for (wa, _), (wb, _) in zip(ws[:-1], ws[1:]):
        out.append(math.sqrt(gr.h1_norm_sq(wb - gr.resample(wa, wb.grid))))
    return TimeSeries(np.array([s for _, s in ws[1:]]), np.array(out), "pcx_h1_increment")


def spectral_tail_fraction(f: Field, frac: float = 2.0 / 3.0) -> float:
    """Share of spectral mass beyond frac * k_nyquist on any axis."""
    fh = np.abs(gr.fft(f.values)) ** 2
    total = float(fh.sum())
    if total == 0:
        return 0.0
    mask = np.zeros(f.grid.shape, dtype=bool)
    for k in f.grid.wavenumbers:
        mask = mask | (np.abs(k) > frac * f.grid.k_nyquist)
    return float(fh[mask].sum()) / total


@dataclass
class LowerBoundReport:
    status: Literal["consistent", "contradiction", "informational"]
    hypotheses_in_range: bool
    form: Literal["pointwise", "integral", "none"]
    fitted_exponent: float | None
    bound_exponent: float | None
    detail: str = ""


@dataclass
class RunReport:
    verdict: Verdict
    tol: float
    sigma0: float
    scattering_state: Field | None = None
    cauchy_series: TimeSeries | None = None
    decay_fit: tuple[float, float] | None = None
    rapid_decay: tuple[bool, float] | None = None
    lower_bound_consistency: LowerBoundReport | None = None
    validity: dict = field(default_factory=dict)
    reason: str = ""
    horizon: float = 0.0

    def summary_row(self) -> dict:
        inc = self.cauchy_series.values[-1] if self.cauchy_series is not None and len(self.cauchy_series) else None
        return {
            "verdict": self.verdict,
            "horizon": self.horizon,
            "tol": self.tol,
            "sigma0": self.sigma0,
            "final_increment": inc,
            "decay_exponent": None if self.decay_fit is None else self.decay_fit[0],
            "decay_r2": None if self.decay_fit is None else self.decay_fit[1],
            "rapid_decay": None if self.rapid_decay is None else self.rapid_decay[0],
            "boundary_ok": self.validity.get("boundary_ok"),
            "weight_ok": self.validity.get("weight_ok"),
            "resolution_ok": self.validity.get("resolution_ok"),
            "reason": self.reason,
        }


def _tail_slope(series: TimeSeries) -> float:
    """Log-log slope of the series over its last decade (all points if fewer)."""
    t_end = series.t[-1]
    m = (series.t >= t_end / 10.0) & (series.values > 0)
    if np.count_nonzero(m) < 2:
        m = series.values > 0
    if np.count_nonzero(m) < 2:
        return -math.inf
    slope, _ = np.polyfit(np.log(series.t[m]), np.log(series.values[m]), 1)
    return float(slope)


def classify_run(traj: Trajectory, tol: float | None = None, *, rel_tol: float = DEFAULT_REL_TOL,
                 table: ExponentTable | None = None) -> RunReport:
    """Assign a verdict to a finished (or diverged) run.

    * BlowupDetected: the run stopped on the divergence detector.
    * Scattered: the last Cauchy increment is below tol, no larger than the
      previous one, and the run stayed inside the box and resolved.
    * NonScattering: increments show no decay over the last decade (log-log
      slope >= -0.05) and stay above 10*tol, with clean validity.
    * Inconclusive: anything else.

    ``tol`` defaults to rel_tol * ||u0||_Sigma.
    """
    row0 = traj.rows[0]
    sigma0 = math.sqrt(row0.mass + row0.grad_l2_sq + row0.variance)
    tol = rel_tol * sigma0 if tol is None else tol
    horizon = traj.times[-1]
    if traj.diverged:
        return RunReport("BlowupDetected", tol, sigma0, reason=traj.divergence_reason or "diverged",
                         validity={"boundary_ok": traj.domain_valid}, horizon=traj.divergence_time or horizon)
    if sigma0 == 0:
        return RunReport("Scattered", tol, sigma0, scattering_state=gr.zeros(traj.final_field.grid),
                         validity={"boundary_ok": True, "resolution_ok": True}, reason="zero data", horizon=horizon)
    cs = cauchy_series(traj)
    final = traj.final_field
    # Shell mass m contributes up to L*sqrt(m) to weighted norms; keep that
    # an order of magnitude below the Cauchy tolerance.
    L = final.grid.half_length
    shell = max(traj.rows[i].boundary_fraction * traj.rows[i].mass for i in traj.snapshot_indices)
    validity = {
        "boundary_ok": traj.domain_valid,
        "invalid_since": traj.invalid_since,
        "weight_ok": L * math.sqrt(shell) < 0.1 * tol,
        "resolution_ok": spectral_tail_fraction(final) < RESOLUTION_TOL,
    }
    clean = validity["boundary_ok"] and validity["weight_ok"] and validity["resolution_ok"]
    report = RunReport("Inconclusive", tol, sigma0, cauchy_series=cs, validity=validity, horizon=horizon)
    la = traj.series("l_alpha2")
    pos = TimeSeries(la.t[la.t > 0], la.values[la.t > 0], la.tag)
    try:
        report.decay_fit = fit_decay_exponent(last_decade_geometric(pos))
    except InsufficientData:
        pass
    inc = cs.values
    if not clean:
        report.reason = "domain or resolution validity failed"
    elif inc[-1] < tol and (len(inc) < 2 or inc[-1] <= inc[-2]):
        report.verdict = "Scattered"
        report.scattering_state = inverse_free_profile(final, traj.times[-1])
        report.reason = f"final increment {inc[-1]:.3e} < tol {tol:.3e}"
    elif _tail_slope(cs) >= -PLATEAU_SLOPE and inc[-1] > 10.0 * tol:
        report.verdict = "NonScattering"
        report.reason = f"increments plateau at {inc[-1]:.3e} (tail slope {_tail_slope(cs):.3f})"
    else:
        report.reason = f"final increment {inc[-1]:.3e}, tail slope {_tail_slope(cs):.3f}"
    if table is not None:
        try:
            report.rapid_decay = rapid_decay_check(pos, table, table.alpha)
        except (InsufficientHorizon, ValueError):
            report.rapid_decay = None
        report.lower_bound_consistency = lower_bound_compare(pos, table, traj.params, report)
    return report


def rapid_decay_check(l_alpha2_series: TimeSeries, table: ExponentTable, alpha: float,
                      flat_tol: float = 0.02) -> tuple[bool, float]:
    """Finite-horizon test of the rapid-decay property.

    At alpha = alpha(d) the weak L^{a,inf} time norm is evaluated on [0, T]
    and [0, T/2]; the property holds when doubling the horizon raises it by
    at most flat_tol.  Above alpha(d) the strong L^a norm is reported and
    the property holds when the fitted decay exponent p satisfies p*a > 1,
    i.e. the tail of the time integral is summable.
    """
    s = l_alpha2_series
    if alpha < table.alpha_crit * (1.0 - 1e-12):
        raise ValueError("rapid decay is only defined for alpha >= alpha(d)")
    if len(s) == 0 or np.any(s.t <= 0):
        raise InsufficientHorizon("need a nonempty series with positive times")
    T = s.t[-1]
    half = s.window(s.t[0], T / 2.0)
    if len(half) < 4 or T / s.t[0] < 4.0:
        raise InsufficientHorizon("horizon too short to establish a trend")
    a = table.a
    if math.isclose(alpha, table.alpha_crit, rel_tol=1e-9):
        full_v = weak_lorentz_time_norm(s, a)
        half_v = weak_lorentz_time_norm(half, a)
        return bool(full_v <= half_v * (1.0 + flat_tol)), full_v
    norm = float(trapezoid(s.values ** a, s.t)) ** (1.0 / a)
    try:
        p, _ = fit_decay_exponent(last_decade_geometric(s))
    except InsufficientData as exc:
        raise InsufficientHorizon(str(exc)) from exc
    return bool(p * a > 1.0 + flat_tol), norm


def lower_bound_compare(l_alpha2_series: TimeSeries, table: ExponentTable, p: Params,
                        verdict: RunReport, exp_tol: float = 0.05) -> LowerBoundReport:
    """Compare the observed decay of ||u(t)||_{alpha+2} with the lower bounds
    that every global non-scattering focusing solution must obey.

    Pointwise form (4/(d+2) < alpha <= 4/d):  ||u(t)|| >= C(1+t)^{-2(1-theta)/(alpha+2)}.
    Integral form (alpha > 4/d):  int_0^t (1+s)||u(s)||^{alpha+2} ds >= C(1+t)^{2 theta}.
    """
    a, d = p.alpha, p.d
    pointwise = a <= 4.0 / d * (1 + 1e-12)
    form = "pointwise" if pointwise else "integral"
    in_range = p.lam > 0 and (a > 4.0 / (d + 2) if pointwise else True)
    theta = table.theta
    if theta is None:
        return LowerBoundReport("informational", False, "none", None, None, "theta not fixed (d = 2 needs an explicit value)")
    if verdict.verdict in ("Scattered", "BlowupDetected"):
        why = "run scattered" if verdict.verdict == "Scattered" else "solution is not global"
        fitted = verdict.decay_fit[0] if verdict.decay_fit else None
        bound = 2.0 * (1.0 - theta) / (a + 2.0)
        extra = ""
        if fitted is not None and verdict.verdict == "Scattered":
            extra = "; decay faster than the non-scattering bound" if fitted > bound else "; decay not faster than the bound"
        return LowerBoundReport("informational", in_range, form, fitted, bound, f"hypotheses fail: {why}{extra}")
    s = l_alpha2_series
    try:
        sub = last_decade_geometric(s)
        if pointwise:
            fitted, _ = fit_decay_exponent(sub)
            bound = 2.0 * (1.0 - theta) / (a + 2.0)
            ok = fitted <= bound + exp_tol
        else:
            integrand = (1.0 + s.t) * s.values ** (a + 2.0)
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(s.t))])
            cs = TimeSeries(s.t[1:], cum[1:], "integral")
            growth, _ = fit_decay_exponent(last_decade_geometric(cs))
            fitted = -growth
            bound = 2.0 * theta
            ok = fitted >= bound - exp_tol
    except InsufficientData:
        return LowerBoundReport("informational", in_range, form, None, None, "not enough samples to fit")
    status = "consistent" if ok else "contradiction"
    detail = "observed decay respects the bound" if ok else "observed decay beats the bound for a non-scattering run"
    if not in_range:
        detail += " (power outside the proven range)"
    return LowerBoundReport(status, in_range, form, fitted, bound, detail)


def convergence_to_free(traj: Trajectory, u_plus: Field, t_plus: float | None = None):
    """||u(t_n) - e^{it_n Lap} u_plus||_Sigma at the stored samples.

    With w = e^{-it Lap}u(t) - u_plus, the difference has H1 norm ||w||_{H1}
    and weighted norm ||(x - 2it grad) w||.  x w is assembled from
    e^{-it Lap}P_t u(t) and, when t_plus is given (u_plus extracted there),
    from e^{-it_+ Lap}P_{t_+}u(t_+); otherwise x*u_plus is formed directly.

    Returns (total, h1_part, weight_part) time series.
    """
    snaps = traj.snapshots
    g = u_plus.grid
    uph = gr.fft(u_plus.values)
    if t_plus is not None:
        idx = min(range(len(snaps)), key=lambda i: abs(snaps[i][0] - t_plus))
        xplus = _Profile(snaps[idx][1], snaps[idx][0]).xhat
    else:
        xplus = [gr.fft(c * u_plus.values) for c in g.coords]
    ts, tot, h1s, ws = [], [], [], []
    for t, u in snaps:
        if t <= 0:
            continue
        pr = _Profile(u, t)
        wh = pr.hat - uph
        h1 = _h1_sq_hat(wh, g)
        wsq = 0.0
        for xw, xp, k in zip(pr.xhat, xplus, g.wavenumbers):
            comp = (xw - xp) - 2j * t * (1j * k * wh)
            wsq += _l2_sq_hat(comp, g)
        ts.append(t)
        h1s.append(math.sqrt(h1))
        ws.append(math.sqrt(wsq))
        tot.append(math.hypot(h1s[-1], ws[-1]))
    ts = np.array(ts)
    return (TimeSeries(ts, np.array(tot), "free_distance"), TimeSeries(ts, np.array(h1s), "free_distance_h1"),
            TimeSeries(ts, np.array(ws), "free_distance_weight"))
