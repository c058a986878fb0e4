"""Command-line driver: config parsing, run execution and CSV/plot output.

Usage::

    nlsscatter {simulate,groundstate,classify,sweep} --config run.ini [--out DIR]
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import grid as gr
from .dynamics import Params, Trajectory, evolve, evolve_nonautonomous, stability_number
from .groundstate import ground_state, gn_constant, gn_functional, pohozaev_residuals
from .initialdata import DataSpec, build, oscillating_data, oscillating_estimator, pcx_phase
from .observables import ROW_COLUMNS, observe
from .scattering import classify_run
from .thresholds import classify_threshold, exponents

log = logging.getLogger("nlsscatter")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_DOMAIN = 4
EXIT_IO = 5

REQUIRED = object()

# section -> key -> (type, default, allowed values or None)
SCHEMA: dict[str, dict[str, tuple]] = {
    "params": {
        "d": (int, REQUIRED, None),
        "alpha": (float, REQUIRED, None),
        "lambda": (float, REQUIRED, None),
        "theta_d2": (float, None, None),
        "seed": (int, 0, None),
    },
    "grid": {
        "n": (int, REQUIRED, None),
        "half_length": (float, REQUIRED, None),
    },
    "time": {
        "t_end": (float, 40.0, None),
        "dt": (float, REQUIRED, None),
        "sample_dt": (float, 0.1, None),
        "ladder": (int, 12, None),
        "mode": (str, "autonomous", ("autonomous", "nonautonomous")),
        "s_max": (float, 0.9, None),
    },
    "data": {
        "family": (str, "gaussian", ("gaussian", "soliton", "oscillating")),
        "amplitude": (float, 1.0, None),
        "width": (float, 1.0, None),
        "b": (float, 0.0, None),
        "base": (str, "gaussian", ("gaussian", "soliton")),
        "oversample": (int, 1, None),
    },
    "tolerances": {
        "blowup_factor": (float, 1e3, None),
        "resolvable_fraction": (float, 0.25, None),
        "boundary_tol": (float, 1e-6, None),
        "cauchy_rel_tol": (float, 1e-4, None),
        "cauchy_tol": (float, None, None),
        "stability_guard": (bool, True, None),
        "gs_tol": (float, 1e-12, None),
        "gs_max_iter": (int, 2000, None),
    },
    "outputs": {
        "prefix": (str, "run", None),
        "plot": (bool, True, None),
    },
    "sweep": {
        "parameter": (str, None, None),
        "values": (list, None, None),
    },
}

SWEEPABLE = ("params.alpha", "params.lambda", "data.amplitude", "data.width", "data.b")

HELP_EPILOG = """exit codes:
  0  success
  2  configuration error (parse, validation or stability guard)
  3  numerical divergence in a run that is not classified
  4  domain-validity failure (boundary contamination)
  5  I/O failure
"""


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    d: int
    alpha: float
    lam: float
    theta_d2: float | None
    seed: int
    n: int
    half_length: float
    t_end: float
    dt: float
    sample_dt: float
    ladder: int
    mode: str
    s_max: float
    data: DataSpec
    oversample: int
    blowup_factor: float
    resolvable_fraction: float
    boundary_tol: float
    cauchy_rel_tol: float
    cauchy_tol: float | None
    stability_guard: bool
    gs_tol: float
    gs_max_iter: int
    prefix: str
    plot: bool
    sweep_parameter: str | None = None
    sweep_values: tuple[float, ...] = ()
    resolved: tuple[tuple[str, str, str], ...] = field(default=(), compare=False)

    @property
    def params(self) -> Params:
        return Params(self.d, self.alpha, self.lam)

    @property
    def grid(self) -> gr.Grid:
        return gr.make_grid(self.d, self.n, self.half_length)

    @property
    def sample_every(self) -> int:
        return max(1, int(round(self.sample_dt / self.dt)))

    def header_lines(self) -> list[str]:
        return [f"# [{sec}] {key} = {val}" for sec, key, val in self.resolved]


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    cur = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            cur = m.group(1).strip().lower()
            if key is None and cur == section:
                return i
            continue
        if key is not None and cur == section:
            m = re.match(r"\s*([^=:\s]+)\s*[=:]", line)
            if m and m.group(1).lower() == key:
                return i
    return None


def _where(text: str, section: str, key: str | None = None) -> str:
    ln = _line_of(text, section, key)
    return f"line {ln}: " if ln else ""


def _convert(kind, raw: str):
    raw = raw.strip()
    if kind is bool:
        low = raw.lower()
        if low not in ("true", "false"):
            raise ValueError("expected true or false")
        return low == "true"
    if kind is int:
        return int(raw)
    if kind is float:
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v
    if kind is list:
        vals = [float(x) for x in raw.split(",") if x.strip()]
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ValueError("expected a comma-separated list of finite numbers")
        return vals
    return raw


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ", ".join(repr(x) for x in v)
    return "" if v is None else str(v)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a sectioned key = value document."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                   empty_lines_in_values=False)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: key outside any section") from exc
    except configparser.ParsingError as exc:
        ln, line = exc.errors[0]
        raise ConfigError(f"line {ln}: cannot parse {line.strip()!r}") from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"line {exc.lineno}: {exc.message}" if exc.lineno else str(exc)) from exc

    raw: dict[tuple[str, str], object] = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{_where(text, sec)}unknown section [{sec}]")
        for key, val in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{_where(text, sec, key)}unknown key '{key}' in [{sec}]")
            kind = SCHEMA[sec][key][0]
            try:
                raw[(sec, key)] = _convert(kind, val)
            except ValueError as exc:
                raise ConfigError(f"{_where(text, sec, key)}[{sec}] {key}: bad value {val!r} ({exc})") from exc

    resolved = []
    vals: dict[str, object] = {}
    for sec, keys in SCHEMA.items():
        for key, (_, default, allowed) in keys.items():
            if (sec, key) in raw:
                v = raw[(sec, key)]
            elif default is REQUIRED:
                raise ConfigError(f"missing required key '{key}' in [{sec}]")
            else:
                v = default
            if allowed is not None and v not in allowed:
                raise ConfigError(f"{_where(text, sec, key)}[{sec}] {key}: must be one of {', '.join(allowed)}")
            vals[f"{sec}.{key}"] = v
            resolved.append((sec, key, _fmt_value(v)))

    def check(key: str, ok: bool, constraint: str):
        if not ok:
            sec, k = key.split(".")
            raise ConfigError(f"{_where(text, sec, k)}[{sec}] {k}: {constraint} required")

    d, n, a = vals["params.d"], vals["grid.n"], vals["params.alpha"]
    check("params.d", d in (1, 2, 3), "d in {1, 2, 3}")
    check("params.alpha", a > 0, "alpha > 0")
    check("params.alpha", d < 3 or a < 4.0 / (d - 2), "alpha < 4/(d-2)")
    check("params.lambda", vals["params.lambda"] != 0, "lambda != 0")
    check("grid.n", n >= 8 and n & (n - 1) == 0, "n a power of two >= 8")
    check("grid.half_length", vals["grid.half_length"] > 0, "half_length > 0")
    check("time.dt", vals["time.dt"] > 0, "dt > 0")
    check("time.t_end", vals["time.t_end"] > 0, "t_end > 0")
    check("time.sample_dt", vals["time.sample_dt"] > 0, "sample_dt > 0")
    check("time.ladder", vals["time.ladder"] >= 2, "ladder >= 2")
    check("time.s_max", 0 < vals["time.s_max"] < 1, "0 < s_max < 1")
    check("data.width", vals["data.width"] > 0, "width > 0")
    check("data.b", vals["data.b"] >= 0, "b >= 0")
    check("data.oversample", vals["data.oversample"] >= 1 and vals["data.oversample"] & (vals["data.oversample"] - 1) == 0,
          "oversample a power of two >= 1")
    check("data.family", vals["data.family"] != "soliton" or d == 1, "d = 1 for soliton data")
    check("data.base", vals["data.base"] != "soliton" or d == 1, "d = 1 for soliton data")
    check("tolerances.blowup_factor", vals["tolerances.blowup_factor"] > 1, "blowup_factor > 1")
    check("tolerances.resolvable_fraction", 0 < vals["tolerances.resolvable_fraction"] <= 1,
          "0 < resolvable_fraction <= 1")
    check("tolerances.boundary_tol", 0 < vals["tolerances.boundary_tol"] < 1, "0 < boundary_tol < 1")
    check("tolerances.cauchy_rel_tol", vals["tolerances.cauchy_rel_tol"] > 0, "cauchy_rel_tol > 0")
    ct = vals["tolerances.cauchy_tol"]
    check("tolerances.cauchy_tol", ct is None or ct > 0, "cauchy_tol > 0")
    check("tolerances.gs_tol", vals["tolerances.gs_tol"] > 0, "gs_tol > 0")
    check("tolerances.gs_max_iter", vals["tolerances.gs_max_iter"] >= 1, "gs_max_iter >= 1")
    check("outputs.prefix", bool(re.fullmatch(r"[A-Za-z0-9_.-]+", vals["outputs.prefix"])),
          "prefix of letters, digits, '.', '_' or '-'")
    th = vals["params.theta_d2"]
    check("params.theta_d2", th is None or 0 < th < 1 - 1 / a, "0 < theta_d2 < 1 - 1/alpha")
    sp, sv = vals["sweep.parameter"], vals["sweep.values"]
    check("sweep.parameter", sp is None or sp in SWEEPABLE, f"parameter in {{{', '.join(SWEEPABLE)}}}")
    check("sweep.values", (sp is None) == (sv is None), "parameter and values given together")

    fam = vals["data.family"]
    base = None
    if fam == "oscillating":
        base = DataSpec(vals["data.base"], vals["data.amplitude"], vals["data.width"])
    spec = DataSpec(fam, vals["data.amplitude"], vals["data.width"], vals["data.b"], base)
    return RunConfig(
        d=d, alpha=a, lam=vals["params.lambda"], theta_d2=th, seed=vals["params.seed"],
        n=n, half_length=vals["grid.half_length"],
        t_end=vals["time.t_end"], dt=vals["time.dt"], sample_dt=vals["time.sample_dt"],
        ladder=vals["time.ladder"], mode=vals["time.mode"], s_max=vals["time.s_max"],
        data=spec, oversample=vals["data.oversample"],
        blowup_factor=vals["tolerances.blowup_factor"],
        resolvable_fraction=vals["tolerances.resolvable_fraction"],
        boundary_tol=vals["tolerances.boundary_tol"],
        cauchy_rel_tol=vals["tolerances.cauchy_rel_tol"], cauchy_tol=ct,
        stability_guard=vals["tolerances.stability_guard"],
        gs_tol=vals["tolerances.gs_tol"], gs_max_iter=vals["tolerances.gs_max_iter"],
        prefix=vals["outputs.prefix"], plot=vals["outputs.plot"],
        sweep_parameter=sp, sweep_values=tuple(sv or ()),
        resolved=tuple(resolved),
    )


def with_override(cfg: RunConfig, key: str, value: float) -> RunConfig:
    """Copy of cfg with one sweepable parameter replaced (echo updated too)."""
    sec, k = key.split(".")
    resolved = tuple((s, kk, _fmt_value(float(value)) if (s, kk) == (sec, k) else v) for s, kk, v in cfg.resolved)
    if sec == "params":
        return replace(cfg, **{"alpha" if k == "alpha" else "lam": float(value)}, resolved=resolved)
    data = replace(cfg.data, **{k: float(value)})
    if data.base is not None and k in ("amplitude", "width"):
        data = replace(data, base=replace(data.base, **{k: float(value)}))
    return replace(cfg, data=data, resolved=resolved)


# -- CSV --------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(rows, path: str, columns=None, header: list[str] | None = None) -> None:
    """Write '#' header lines, a column line, then one line per row.

    Rows may be ObservableRow objects, dicts or sequences.  Floats use repr,
    which round-trips exactly; None becomes an empty cell.
    """
    rows = list(rows)
    if columns is None:
        if rows and isinstance(rows[0], dict):
            columns = list(rows[0])
        else:
            columns = list(ROW_COLUMNS)
    buf = io.StringIO()
    for line in header or []:
        buf.write(line.rstrip("\n") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        if isinstance(r, dict):
            vals = [r.get(c) for c in columns]
        elif hasattr(r, "as_tuple"):
            vals = r.as_tuple()
        else:
            vals = list(r)
        w.writerow([_cell(v) for v in vals])
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s) if re.fullmatch(r"[+-]?\d+", s) else float(s)
    except ValueError:
        return s


def read_csv(path: str) -> tuple[list[str], list[str], list[dict]]:
    """Inverse of write_csv: (comment lines, columns, rows as dicts)."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        return comments, [], []
    reader = csv.reader(body)
    columns = next(reader)
    rows = [dict(zip(columns, (_parse_cell(c) for c in rec))) for rec in reader]
    return comments, columns, rows


def write_plot_script(path: str, csv_name: str, columns: list[str], title: str) -> None:
    """gnuplot commands plotting the named columns of csv_name against t."""
    lines = [
        f"# regenerate with: gnuplot {os.path.basename(path)}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        "set xlabel 't'",
    ]
    for col in columns:
        out = f"{os.path.splitext(csv_name)[0]}_{col}.png"
        lines += [
            f"set output '{out}'",
            f"set title '{title}: {col}'",
            f"plot '{csv_name}' using (column('t')):(column('{col}')) with lines title '{col}'",
        ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# -- execution --------------------------------------------------------------

def initial_field(cfg: RunConfig) -> gr.Field:
    g = cfg.grid
    if cfg.data.family != "oscillating" or cfg.oversample == 1:
        return build(cfg.data, g, cfg.alpha)
    # Chirped data is built on a finer grid over the same box, then
    # band-limited back onto the run grid.
    fine = gr.make_grid(cfg.d, cfg.n * cfg.oversample, cfg.half_length)
    phi = build(cfg.data.base, fine, cfg.alpha)
    return gr.resample(oscillating_data(phi, cfg.data.b), g)


def _guard(cfg: RunConfig) -> None:
    if cfg.stability_guard and stability_number(cfg.grid, cfg.dt) > math.pi:
        raise ConfigError(f"stability guard: dt*k_max^2 = {stability_number(cfg.grid, cfg.dt):.4g} > pi; "
                          "reduce dt or set [tolerances] stability_guard = false")


def _run(cfg: RunConfig, u0: gr.Field, snapshots=None) -> Trajectory:
    kw = dict(sample_every=cfg.sample_every, blowup_factor=cfg.blowup_factor,
              resolvable_fraction=cfg.resolvable_fraction, boundary_tol=cfg.boundary_tol)
    if cfg.mode == "nonautonomous" and snapshots is None:
        return evolve_nonautonomous(pcx_phase(u0, -1), 0.0, cfg.s_max, cfg.dt, cfg.params,
                                    store_fields=False, **kw)
    return evolve(u0, 0.0, cfg.t_end, cfg.dt, cfg.params, snapshot_times=snapshots, **kw)


def _path(out: str, cfg: RunConfig, suffix: str) -> str:
    return os.path.join(out, f"{cfg.prefix}_{suffix}")


def run_simulate(cfg: RunConfig, out: str) -> int:
    _guard(cfg)
    traj = _run(cfg, initial_field(cfg))
    path = _path(out, cfg, "trajectory.csv")
    write_csv(traj.rows, path, header=cfg.header_lines())
    if cfg.plot:
        write_plot_script(_path(out, cfg, "trajectory.gp"), os.path.basename(path),
                          ["mass", "energy", "grad_l2_sq", "l_alpha2", "boundary_fraction"], cfg.prefix)
    log.info("wrote %s (%d rows)", path, len(traj.rows))
    if traj.diverged:
        print(f"diverged at t = {traj.divergence_time:.6g}: {traj.divergence_reason}")
        return EXIT_DIVERGED
    if not traj.domain_valid:
        print(f"boundary contamination from t = {traj.invalid_since:.6g}")
        return EXIT_DOMAIN
    print(f"simulated {len(traj.rows)} samples to t = {traj.times[-1]:.6g}")
    return EXIT_OK


def run_groundstate(cfg: RunConfig, out: str) -> int:
    p, g = cfg.params, cfg.grid
    q = ground_state(p, g, tol=cfg.gs_tol, max_iter=cfg.gs_max_iter)
    r1, r2 = pohozaev_residuals(q)
    axes = ["x", "y", "z"][: cfg.d]
    cols = [c.ravel() for c in np.meshgrid(*([g.x] * cfg.d), indexing="ij")]
    prof = np.real(q.profile.values).ravel()
    path = _path(out, cfg, "groundstate.csv")
    write_csv(zip(*cols, prof), path, columns=axes + ["q"], header=cfg.header_lines())
    report = {
        "mass": q.mass, "grad_sq": q.grad_sq, "potential": q.potential, "energy": q.energy(1.0),
        "residual": q.residual, "iterations": q.iterations, "pohozaev_1": r1, "pohozaev_2": r2,
        "gn_constant": gn_constant(q), "gn_functional": gn_functional(q.profile, cfg.alpha),
    }
    write_csv([report], _path(out, cfg, "groundstate_report.csv"), header=cfg.header_lines())
    if cfg.plot and cfg.d == 1:
        with open(_path(out, cfg, "groundstate.gp"), "w", encoding="utf-8", newline="") as fh:
            fh.write("set datafile separator ','\nset key autotitle columnhead\n"
                     "set terminal pngcairo size 900,600\n"
                     f"set output '{cfg.prefix}_groundstate.png'\n"
                     f"plot '{os.path.basename(path)}' using (column('x')):(column('q')) with lines\n")
    print(f"ground state: mass {q.mass:.10g}, Pohozaev residuals {r1:.3e} {r2:.3e}, "
          f"C_GN {report['gn_constant']:.10g}")
    return EXIT_OK


def classify_config(cfg: RunConfig) -> tuple[dict, Trajectory, object]:
    """Run to t_end on a geometric snapshot ladder and classify."""
    ladder = [cfg.t_end * 2.0 ** (-k) for k in range(cfg.ladder)]
    u0 = initial_field(cfg)
    traj = _run(cfg, u0, snapshots=ladder)
    p = cfg.params
    table = exponents(cfg.d, cfg.alpha, cfg.theta_d2)
    rep = classify_run(traj, cfg.cauchy_tol, rel_tol=cfg.cauchy_rel_tol, table=table)
    row = rep.summary_row()
    lb = rep.lower_bound_consistency
    row["lower_bound"] = None if lb is None else lb.status
    row["regime"] = row["eta0"] = row["below_thresholds"] = None
    if p.lam > 0 and cfg.alpha * cfg.d >= 4.0:
        q = ground_state(p, cfg.grid, tol=cfg.gs_tol, max_iter=cfg.gs_max_iter)
        tv = classify_threshold(observe(u0, 0.0, p), q, p)
        row.update(regime=tv.regime, eta0=tv.eta0, below_thresholds=tv.admits_scattering_claim)
    if cfg.data.family == "oscillating":
        phi = build(cfg.data.base, cfg.grid, cfg.alpha)
        row["estimator"] = oscillating_estimator(phi, cfg.data.b, cfg.alpha)
    return row, traj, rep


def _summary(row: dict) -> str:
    lines = [f"verdict: {row['verdict']}", f"reason: {row['reason']}",
             f"horizon: {row['horizon']:.6g}  tol: {row['tol']:.3e}"]
    if row.get("decay_exponent") is not None:
        lines.append(f"decay exponent of ||u||_(alpha+2): {row['decay_exponent']:.4f}")
    if row.get("regime"):
        lines.append(f"threshold regime: {row['regime']}, below thresholds: {row['below_thresholds']}")
    return "\n".join(lines)


def run_classify(cfg: RunConfig, out: str) -> int:
    _guard(cfg)
    row, traj, rep = classify_config(cfg)
    hdr = cfg.header_lines()
    write_csv([row], _path(out, cfg, "report.csv"), header=hdr)
    tpath = _path(out, cfg, "trajectory.csv")
    write_csv(traj.rows, tpath, header=hdr)
    if rep.scattering_state is not None:
        sf = rep.scattering_state
        cols = [c.ravel() for c in np.meshgrid(*([sf.grid.x] * cfg.d), indexing="ij")]
        v = sf.values.ravel()
        write_csv(zip(*cols, v.real, v.imag), _path(out, cfg, "scattering_state.csv"),
                  columns=["x", "y", "z"][: cfg.d] + ["re", "im"], header=hdr)
    if cfg.plot:
        write_plot_script(_path(out, cfg, "trajectory.gp"), os.path.basename(tpath),
                          ["mass", "energy", "l_alpha2", "boundary_fraction"], cfg.prefix)
    print(_summary(row))
    if row["verdict"] == "Inconclusive" and not rep.validity.get("boundary_ok", True):
        return EXIT_DOMAIN
    return EXIT_OK


def _sweep_one(args):
    cfg, key, value = args
    sub = with_override(cfg, key, value)
    row, _, _ = classify_config(sub)
    return {key: value, **row}


def run_sweep(cfg: RunConfig, out: str, workers: int = 1) -> int:
    if cfg.sweep_parameter is None:
        raise ConfigError("sweep needs [sweep] parameter and values")
    _guard(cfg)
    jobs = [(cfg, cfg.sweep_parameter, v) for v in cfg.sweep_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    cols = list(dict.fromkeys(k for r in rows for k in r))
    write_csv(rows, _path(out, cfg, "sweep.csv"), columns=cols, header=cfg.header_lines())
    for r in rows:
        print(f"{cfg.sweep_parameter} = {r[cfg.sweep_parameter]!r}: {r['verdict']}")
    return EXIT_OK


def execute(cmd: str, cfg: RunConfig, out: str = ".", workers: int = 1) -> int:
    """Run one command; returns the process exit status."""
    try:
        os.makedirs(out, exist_ok=True)
        if cmd == "simulate":
            return run_simulate(cfg, out)
        if cmd == "groundstate":
            return run_groundstate(cfg, out)
        if cmd == "classify":
            return run_classify(cfg, out)
        if cmd == "sweep":
            return run_sweep(cfg, out, workers)
        raise ConfigError(f"unknown command {cmd!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # Precondition failures surfaced while building data (unresolved
        # chirp, data touching the boundary) are domain problems.
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlsscatter", description=__doc__.splitlines()[0],
                                 epilog=HELP_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=["simulate", "groundstate", "classify", "sweep"])
    ap.add_argument("--config", required=True, help="sectioned key = value file")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--workers", type=int, default=1, help="parallel runs for sweep")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"I/O error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return execute(args.command, cfg, args.out, args.workers)


if __name__ == "__main__":
    sys.exit(main())
