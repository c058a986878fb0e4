"""Acceptance suite: thirteen criteria at their stated tolerances.

Each criterion records its sub-checks through the ``record`` fixture; a
PASS/FAIL line per criterion is printed in the terminal summary.  Two
sub-checks cannot hold as stated and are kept as strict xfails so that
they fail visibly without turning the run red.
"""
import math
import time

import numpy as np
import pytest

from nlsscatter import grid as gr
from nlsscatter.dynamics import Params, evolve, evolve_nonautonomous
from nlsscatter.groundstate import gn_constant, gn_functional, ground_state, petviashvili, pohozaev_residuals
from nlsscatter.groundstate import soliton_closed_form_1d
from nlsscatter.initialdata import (gaussian, oscillating_data, oscillating_estimator, oscillating_exponents,
                                    oscillating_identity_residual, pcx_phase)
from nlsscatter.observables import TimeSeries, fit_decay_exponent, observe, pcx_energy_derivatives
from nlsscatter.observables import weak_lorentz_time_norm
from nlsscatter.pcx import identity_residuals, to_pcx
from nlsscatter.scattering import (cauchy_series, classify_run, convergence_to_free, pcx_cauchy_series,
                                   sigma_norm)
from nlsscatter.thresholds import alpha_crit, alpha_small, classify_threshold, exponents

ALPHA1 = (1 + math.sqrt(17)) / 2


def ladder(T, n=12):
    return [T * 2.0 ** -k for k in range(n)]


def rel_drift(rows, name):
    v = np.array([getattr(r, name) for r in rows])
    return float(np.max(np.abs(v - v[0])) / abs(v[0]))


# -- 1, 2: conservation and soliton fidelity ---------------------------------

@pytest.fixture(scope="module")
def soliton_runs():
    g = gr.make_grid(1, 4096, 40.0)
    q = soliton_closed_form_1d(2.0, g)
    p = Params(1, 2.0, 1.0)
    out = {}
    t0 = time.perf_counter()
    for dt in (1e-3, 5e-4):
        out[dt] = evolve(q, 0.0, 10.0, dt, p, sample_every=int(round(0.05 / dt)), snapshot_times=[5.0])
    return q, out, time.perf_counter() - t0


def test_acc01_conservation(soliton_runs, record):
    _, runs, elapsed = soliton_runs
    md = max(rel_drift(tr.rows, "mass") for tr in runs.values())
    ed = rel_drift(runs[1e-3].rows, "energy")
    ok = [
        record(1, "mass drift <= 1e-10", md <= 1e-10, f"{md:.2e}"),
        record(1, "energy drift <= 1e-6", ed <= 1e-6, f"{ed:.2e}"),
        record(1, "runtime < 30 s", elapsed < 30, f"{elapsed:.1f} s"),
    ]
    assert all(ok)


@pytest.mark.xfail(strict=True, reason="soliton energy error is O(dt^4) and at roundoff for dt=1e-3; see decisions ledger")
def test_acc01_energy_drift_ratio(soliton_runs, record):
    _, runs, _ = soliton_runs
    ratio = rel_drift(runs[1e-3].rows, "energy") / rel_drift(runs[5e-4].rows, "energy")
    ok = record(1, "dt-halving energy ratio in [3.5, 4.5]", 3.5 <= ratio <= 4.5,
                f"ratio {ratio:.3f}; drifts {rel_drift(runs[1e-3].rows, 'energy'):.2e}, "
                f"{rel_drift(runs[5e-4].rows, 'energy'):.2e} are roundoff")
    assert ok


def test_acc02_soliton_fidelity(soliton_runs, record):
    q, runs, elapsed = soliton_runs
    tr = runs[1e-3]
    (t5, u5), = [(t, u) for t, u in tr.snapshots if abs(t - 5.0) < 1e-9]
    err = gr.l2_norm(u5 - q.scaled(np.exp(5j))) / gr.l2_norm(q)
    ok = [
        record(2, "||u(5) - e^{5i}Q||/||Q|| <= 1e-4", err <= 1e-4, f"{err:.2e}"),
        record(2, "runtime < 15 s", elapsed / 3 < 15, f"{elapsed / 3:.1f} s for the dt=1e-3 run"),
    ]
    assert all(ok)


# -- 3: ground states ---------------------------------------------------------

def test_acc03_ground_states(record):
    t0 = time.perf_counter()
    g = gr.make_grid(1, 2048, 20.0)
    init = gr.sample(g, lambda x: np.exp(-x * x / 2) + 0j)
    ok = []
    for a in (2.0, 4.0, 6.0):
        q = petviashvili(Params(1, a, 1.0), g, init)
        linf = float(np.max(np.abs(q.profile.values - soliton_closed_form_1d(a, g).values)))
        r = max(pohozaev_residuals(q))
        gn_err = abs(gn_functional(q.profile, a) / gn_constant(q) - 1)
        ok.append(record(3, f"alpha={a:g} closed form Linf <= 1e-6", linf <= 1e-6, f"{linf:.2e}"))
        ok.append(record(3, f"alpha={a:g} Pohozaev <= 1e-6", r <= 1e-6, f"{r:.2e}"))
        ok.append(record(3, f"alpha={a:g} GN functional = C_GN to 1e-6", gn_err <= 1e-6, f"{gn_err:.2e}"))
        if a == 4.0:
            c = gn_constant(q)
            ok.append(record(3, "C_GN(d=1, alpha=4) = 4/pi^2 to 1e-6", abs(c - 4 / math.pi ** 2) <= 1e-6, f"{c:.9f}"))
    g2 = gr.make_grid(2, 128, 12.0)
    q2 = ground_state(Params(2, 2.0, 1.0), g2)
    r2 = max(pohozaev_residuals(q2))
    ok.append(record(3, "d=2 alpha=2 Pohozaev <= 1e-5", r2 <= 1e-5, f"{r2:.2e}"))
    el = time.perf_counter() - t0
    ok.append(record(3, "runtime < 30 s", el < 30, f"{el:.1f} s"))
    assert all(ok)


# -- 4: free propagator ---------------------------------------------------------

def test_acc04_free_propagator(record):
    t0 = time.perf_counter()
    # L = 20 lets the t = 2 profile (|f| ~ e^{-x^2/34}) wrap at the 1e-5 level
    g = gr.make_grid(1, 2048, 40.0)
    f = gr.sample(g, lambda x: np.exp(-x * x / 2) + 0j)
    worst = 0.0
    for t in (0.5, 1.0, 2.0):
        z = 1 + 2j * t
        exact = z ** -0.5 * np.exp(-g.x ** 2 / (2 * z))
        worst = max(worst, float(np.max(np.abs(gr.free_propagate(f, t).values - exact))))
    el = time.perf_counter() - t0
    ok = [record(4, "Gaussian closed form Linf <= 1e-8", worst <= 1e-8, f"{worst:.2e}"),
          record(4, "runtime < 5 s", el < 5, f"{el:.2f} s")]
    assert all(ok)


# -- 5: pseudo-conformal identities --------------------------------------------

def test_acc05_pcx_identities(record):
    t0 = time.perf_counter()
    p = Params(1, 3.0, -1.0)
    g = gr.make_grid(1, 2048, 64.0)
    u0 = gaussian(g)
    tr = evolve(u0, 0.0, 4.0, 1e-3, p, sample_every=250, snapshot_times=[0.25, 1.0, 4.0])
    ok = []
    for t, u in tr.snapshots:
        s = t / (1 + t)
        r = max(identity_residuals(to_pcx(u, t), p))
        ok.append(record(5, f"s={s:.1f} identity residuals <= 1e-6", r <= 1e-6, f"{r:.2e}"))

    v0 = pcx_phase(u0, -1)
    errs = {}
    for ds in (1e-3, 5e-4):
        m = 10
        h = m * ds
        nt = evolve_nonautonomous(v0, 0.0, 0.85, ds, p, sample_every=m, store_fields=False)
        S = np.array(nt.times)
        E1 = np.array([r.e1 for r in nt.rows])
        E2 = np.array([r.e2 for r in nt.rows])
        for s in (0.2, 0.5, 0.8):
            i = int(np.argmin(np.abs(S - s)))
            r = nt.rows[i]
            x1, x2 = pcx_energy_derivatives(r.grad_l2_sq, r.l_alpha2 ** (p.alpha + 2), S[i], p)
            errs[(ds, s)] = (abs((E1[i + 1] - E1[i - 1]) / (2 * h) - x1),
                             abs((E2[i + 1] - E2[i - 1]) / (2 * h) - x2))
    for s in (0.2, 0.5, 0.8):
        for k, name in enumerate(("E1", "E2")):
            order = math.log2(errs[(1e-3, s)][k] / errs[(5e-4, s)][k])
            ok.append(record(5, f"d{name}/ds order at s={s}", 1.8 <= order <= 2.2, f"order {order:.3f}"))
    el = time.perf_counter() - t0
    ok.append(record(5, "runtime < 60 s", el < 60, f"{el:.1f} s"))
    assert all(ok)


# -- 6: exact law at the mass-critical power ----------------------------------

def test_acc06_mass_critical_law(record):
    t0 = time.perf_counter()
    p = Params(1, 4.0, -1.0)
    g = gr.make_grid(1, 4096, 100.0)
    u0 = gaussian(g)
    tr = evolve(u0, 0.0, 5.0, 1e-3, p, sample_every=50, store_fields=False)
    v0 = tr.rows[0].variance
    # n_monitor = ||P_t u||^2 - 8 lam t^2/(a+2) ||u||^{a+2} = 8 t^2 E[e^{-i|x|^2/4t} u]
    dev = max(abs(r.n_monitor - v0) / v0 for r in tr.rows if 0.5 <= r.t <= 5.0)
    el = time.perf_counter() - t0
    ok = [record(6, "|8t^2 E[v] - ||x u0||^2| / ||x u0||^2 <= 1e-4", dev <= 1e-4, f"{dev:.2e}"),
          record(6, "runtime < 30 s", el < 30, f"{el:.1f} s")]
    assert all(ok)


# -- 7: oscillating-data identity ------------------------------------------------

def test_acc07_oscillating_identity(record):
    t0 = time.perf_counter()
    g = gr.make_grid(1, 4096, 40.0)
    phi = gaussian(g)
    worst = max(oscillating_identity_residual(phi, b, t) for b in (0.5, 1, 2, 4) for t in (0.25, 0.5, 1))
    m0 = gr.l2_norm_sq(phi)
    spread = max(abs(gr.l2_norm_sq(oscillating_data(phi, b)) / m0 - 1) for b in (0.0, 0.5, 1, 2, 4))
    el = time.perf_counter() - t0
    ok = [record(7, "chirp identity residual <= 1e-8", worst <= 1e-8, f"{worst:.2e}"),
          record(7, "mass independent of b to 1e-12", spread <= 1e-12, f"{spread:.2e}"),
          record(7, "runtime < 10 s", el < 10, f"{el:.2f} s")]
    assert all(ok)


# -- 8: defocusing scattering -----------------------------------------------------

def test_acc08_defocusing_scattering(record):
    t0 = time.perf_counter()
    p = Params(1, 3.0, -1.0)
    T = 40.0
    g = gr.make_grid(1, 4096, 640.0)
    tr = evolve(gaussian(g, 0.1, 1.0), 0.0, T, 0.01, p, sample_every=10, snapshot_times=ladder(T))
    rep = classify_run(tr, table=exponents(1, 3.0))
    inc = rep.cauchy_series.values
    target = 1 * 3.0 / (2 * 5.0)
    fit = rep.decay_fit[0] if rep.decay_fit else float("nan")
    ok = [
        record(8, "verdict Scattered", rep.verdict == "Scattered", rep.reason),
        # geometric ladder: early increments span short intervals, so only the
        # last decade (after the nonlinear transient) is required to decrease
        record(8, "Cauchy increments decreasing over the last decade",
               bool(np.all(np.diff(rep.cauchy_series.window(T / 10, T).values) < 0)),
               np.array2string(inc, precision=2)),
        record(8, "decay exponent within 15% of 0.3", abs(fit / target - 1) <= 0.15, f"{fit:.4f}"),
    ]
    if rep.scattering_state is not None:
        up = rep.scattering_state
        tot, h1, _ = convergence_to_free(tr, up, t_plus=T)
        norm = sigma_norm(up).total
        tail = tot.window(T / 4, T).values
        last = tot.values[tot.t < T][-1]
        ok.append(record(8, "distance to free flow: tail decreasing", bool(np.all(np.diff(tail) < 0)),
                         np.array2string(tail / norm, precision=2)))
        ok.append(record(8, "distance at last sample before T <= 1e-2 ||u+||", last <= 1e-2 * norm,
                         f"{last / norm:.2e} at t={tot.t[tot.t < T][-1]:g}"))
        ok.append(record(8, "H1 part decreasing", bool(np.all(np.diff(h1.values) < 0))))
        ok.append(record(8, "scattering-state mass = M[u0] to 1e-8",
                         abs(gr.l2_norm_sq(up) / tr.rows[0].mass - 1) <= 1e-8))
        ratio = pcx_cauchy_series(tr).values / inc
        ok.append(record(8, "pcx/Sigma increment ratio in [0.1, 10]", bool(np.all((ratio > 0.1) & (ratio < 10))),
                         f"{ratio.min():.2f}..{ratio.max():.2f}"))
    el = time.perf_counter() - t0
    ok.append(record(8, "runtime < 90 s", el < 90, f"{el:.1f} s"))
    assert all(ok)


# -- 9: focusing dichotomy above the mass-critical power ----------------------

@pytest.fixture(scope="module")
def q6():
    return ground_state(Params(1, 6.0, 1.0), gr.make_grid(1, 2048, 20.0))


@pytest.fixture(scope="module")
def blowup9():
    p = Params(1, 6.0, 1.0)
    g = gr.make_grid(1, 4096, 8.0)
    u0 = gaussian(g, 1.5, 1.0)
    t0 = time.perf_counter()
    tr = evolve(u0, 0.0, 1.0, 4e-6, p, sample_every=2500)
    return u0, tr, time.perf_counter() - t0


def test_acc09_focusing_dichotomy(q6, blowup9, record):
    t0 = time.perf_counter()
    p = Params(1, 6.0, 1.0)
    g = gr.make_grid(1, 16384, 1280.0)
    u0 = gaussian(g, 0.8, 1.0)
    tv = classify_threshold(observe(u0, 0.0, p), q6, p)
    ok = [record(9, "c=0.8 strictly below both thresholds", tv.below_mass_energy and tv.below_mass_gradient,
                 f"eta0 {tv.eta0:.3f}")]
    T = 40.0
    tr = evolve(u0, 0.0, T, 5e-3, p, sample_every=20, snapshot_times=ladder(T))
    rep = classify_run(tr, table=exponents(1, 6.0))
    ok.append(record(9, "c=0.8 verdict Scattered", rep.verdict == "Scattered", rep.reason))

    ub, trb, el_b = blowup9
    row = observe(ub, 0.0, p)
    verdict = classify_run(trb).verdict
    ok.append(record(9, "c=1.5 has negative energy", row.energy < 0, f"E = {row.energy:.3f}"))
    ok.append(record(9, "c=1.5 verdict BlowupDetected", verdict == "BlowupDetected",
                     f"t = {trb.divergence_time}"))
    el = time.perf_counter() - t0 + el_b
    ok.append(record(9, "runtime < 90 s", el < 90, f"{el:.1f} s"))
    assert all(ok)


@pytest.mark.xfail(strict=True, reason="E < 0 forces eta0 < 0 since E[Q] > 0; see decisions ledger")
def test_acc09_negative_energy_eta_above_one(q6, blowup9, record):
    p = Params(1, 6.0, 1.0)
    ub, _, _ = blowup9
    tv = classify_threshold(observe(ub, 0.0, p), q6, p)
    assert record(9, "negative-energy datum has eta0 > 1", tv.eta0 > 1,
                  f"eta0 = {tv.eta0:.3f} (E[Q] = {q6.energy():.3f} > 0)")


# -- 10: mass-critical threshold -------------------------------------------------

def test_acc10_mass_critical_threshold(record):
    t0 = time.perf_counter()
    p = Params(1, 4.0, 1.0)
    q = ground_state(p, gr.make_grid(1, 2048, 20.0))
    g = gr.make_grid(1, 16384, 512.0)
    u0 = gr.sample(g, lambda x: 1.0 * np.exp(-x * x) + 0j)
    tv = classify_threshold(observe(u0, 0.0, p), q, p)
    tr = evolve(u0, 0.0, 20.0, 2e-3, p, sample_every=50, store_fields=False)
    ok = [record(10, "c=1.0 below ||Q||_2", tv.admits_scattering_claim),
          record(10, "c=1.0 no blow-up over T=20", not tr.diverged and tr.domain_valid,
                 f"max grad^2 {max(r.grad_l2_sq for r in tr.rows):.3f}")]
    gb = gr.make_grid(1, 4096, 8.0)
    ub = gr.sample(gb, lambda x: 2.5 * np.exp(-x * x) + 0j)
    row = observe(ub, 0.0, p)
    trb = evolve(ub, 0.0, 0.5, 4e-6, p, sample_every=2500)
    ok.append(record(10, "c=2.5 negative energy", row.energy < 0, f"E = {row.energy:.3f}"))
    ok.append(record(10, "c=2.5 verdict BlowupDetected", classify_run(trb).verdict == "BlowupDetected",
                     f"t = {trb.divergence_time}"))
    el = time.perf_counter() - t0
    ok.append(record(10, "runtime < 60 s", el < 60, f"{el:.1f} s"))
    assert all(ok)


# -- 11: soliton does not scatter -----------------------------------------------

def test_acc11_soliton_non_scattering(record):
    t0 = time.perf_counter()
    p = Params(1, 2.0, 1.0)
    g = gr.make_grid(1, 1024, 40.0)
    q = soliton_closed_form_1d(2.0, g)
    T = 40.0
    tr = evolve(q, 0.0, T, 2e-3, p, sample_every=50, snapshot_times=ladder(T))
    rep = classify_run(tr, table=exponents(1, 2.0))
    lb = rep.lower_bound_consistency
    cs = cauchy_series(tr)
    ok = [record(11, "verdict NonScattering (plateau)", rep.verdict == "NonScattering", rep.reason),
          record(11, "increments >= 0.01 ||Q||_Sigma on [1, T]",
                 bool(np.min(cs.window(1.0, T).values) >= 0.01 * sigma_norm(q).total)),
          record(11, "lower bound consistent", lb is not None and lb.status == "consistent",
                 "" if lb is None else lb.detail)]
    el = time.perf_counter() - t0
    ok.append(record(11, "runtime < 30 s", el < 30, f"{el:.1f} s"))
    assert all(ok)


# -- 12: estimator oracles ----------------------------------------------------------

def test_acc12_estimator_oracles(record):
    t0 = time.perf_counter()
    a = exponents(1, ALPHA1).a
    t = np.geomspace(0.01, 1e3, 300)
    w = weak_lorentz_time_norm(TimeSeries(t, t ** (-1 / a)), a)
    ok = [record(12, "weak Lorentz of t^{-1/a} = 1 +- 2%", abs(w - 1) <= 0.02, f"{w:.12f}")]
    tt = np.geomspace(1, 100, 40)
    p_exact, r2 = fit_decay_exponent(TimeSeries(tt, tt ** -0.3))
    ok.append(record(12, "exact t^-0.3 fit", abs(p_exact - 0.3) <= 1e-10 and abs(r2 - 1) <= 1e-10))
    rng = np.random.default_rng(12)
    fits = [fit_decay_exponent(TimeSeries(tt, tt ** -0.75 * (1 + 0.005 * rng.standard_normal(40))))[0]
            for _ in range(50)]
    ok.append(record(12, "noisy t^-0.75 fits in [0.72, 0.78]", min(fits) >= 0.72 and max(fits) <= 0.78,
                     f"{min(fits):.4f}..{max(fits):.4f}"))
    res = max(max(abs(d * alpha_crit(d) ** 2 + (d - 2) * alpha_crit(d) - 4),
                  abs(d * alpha_small(d) ** 2 + d * alpha_small(d) - 4)) for d in (1, 2, 3))
    ok.append(record(12, "polynomial residuals <= 1e-12", res <= 1e-12, f"{res:.1e}"))
    ok.append(record(12, "alpha(3) = 1 exactly", alpha_crit(3) == 1.0))
    el = time.perf_counter() - t0
    ok.append(record(12, "runtime < 5 s", el < 5, f"{el:.2f} s"))
    assert all(ok)


# -- 13: oscillating data ----------------------------------------------------------

def test_acc13_oscillating_trend(record):
    t0 = time.perf_counter()
    p = Params(1, ALPHA1, 1.0)
    mu0, _ = oscillating_exponents(1, ALPHA1)
    amp = 0.1
    bs = (1.0, 2.0, 4.0, 8.0)
    phi_small = gaussian(gr.make_grid(1, 4096, 40.0), amp, 1.0)
    est = [oscillating_estimator(phi_small, b, ALPHA1) for b in bs]
    scaled = [e * b ** (2 / mu0) for e, b in zip(est, bs)]
    ok = [record(13, "estimator decreasing in b", all(x > y for x, y in zip(est, est[1:])),
                 " ".join(f"{e:.4g}" for e in est)),
          record(13, "b^{-2/mu0} trend within factor 2", max(scaled) / min(scaled) <= 2.0,
                 f"spread {max(scaled) / min(scaled):.3f}")]
    # build on a finer grid so the chirp is resolved, then band-limit onto the run grid
    L, T = 1280.0, 20.0
    fine = gr.make_grid(1, 65536, L)
    g = gr.make_grid(1, 32768, L)
    u0 = gr.resample(oscillating_data(gaussian(fine, amp, 1.0), bs[-1]), g)
    tr = evolve(u0, 0.0, T, 5e-3, p, sample_every=20, snapshot_times=ladder(T))
    rep = classify_run(tr, table=exponents(1, ALPHA1))
    ok.append(record(13, f"b={bs[-1]:g} verdict Scattered", rep.verdict == "Scattered", rep.reason))
    el = time.perf_counter() - t0
    ok.append(record(13, "runtime < 180 s", el < 180, f"{el:.1f} s"))
    assert all(ok)
