"""Simulation loop, persistence, parameter sweeps and verification suites.

Output layout of :func:`run` in ``out``::

    diagnostics.csv   '# schema=1' comment, header, one row per record (%.17g)
    snap_XXXX_<field>.txt   '# nx ny Lx Ly t field' header + row-major values
    snap_XXXX_<field>.bin   optional raw little-endian float64 (output.binary)
    manifest.json     snapshot times and files, figures
    summary.json      final norms, decay fits, threshold report, audits

Diagnostics columns are ``step``, ``dt`` followed by
:func:`ksns.diagnostics.columns` for the configured ``output.betas``.
"""

import csv
import itertools
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics, elliptic, fluid, inequality_lab, mesh, transport
from .errors import DomainError, FitError, InvalidConfig, KSNSError, RunAborted, TimeStepError
from .fields import SimConfig, State, initialize, sample_phi

SCHEMA = 1
FIT_COLUMNS = ("dev_n_linf", "ctilde_h1", "lyapunov")
GROWTH_THRESHOLD = 1.05
WORKERS_ENV = "KSNS_WORKERS"


def fmt(x):
    return "%.17g" % x


def diag_columns(config):
    return ("step", "dt") + diagnostics.columns(config.betas)


class Simulation:
    """Explicit stepping interface; :func:`run` wraps it with I/O.

    The stored state is always consistent: ``c`` solves the signal equation
    for the stored ``n`` and ``u``.
    """

    def __init__(self, config: SimConfig):
        self.config = config
        self.grid = config.grid
        self.spec = config.sensitivity()
        self.state = initialize(config)
        self.phi = sample_phi(config, self.grid) if config.fluid else None
        self.nbar0 = mesh.integrate(self.grid, self.state.n) / self.grid.area
        self.sum0 = float(self.state.n.sum())
        self.steps = 0
        self.last_dt = 0.0
        self.max_mass_drift = 0.0
        self.min_n = float(self.state.n.min())
        self.min_c = float(self.state.c.min())

    def allowed_dt(self, drift):
        """Smallest of ``dt_max`` and the stability limits for this state."""
        cfg, grid, vel = self.config, self.grid, self.state.vel
        limits = [cfg.dt_max]
        speed = max(drift.max_speed, vel.max_speed())
        if speed > 0:
            limits.append(cfg.cfl * min(grid.hx, grid.hy) / speed)
        limits.append(transport.positivity_dt_limit(grid, drift))
        if cfg.fluid:
            limits.append(fluid.advective_dt_limit(grid, vel))
        return min(limits)

    def choose_dt(self, drift):
        """``dt_max / 2**k`` for the least admissible ``k``.

        Quantising keeps the cached implicit factorisations reusable.
        """
        allowed = self.allowed_dt(drift)
        dt = self.config.dt_max
        while dt > allowed:
            dt *= 0.5
            if dt < self.config.dt_min:
                raise TimeStepError(
                    f"time step fell below dt_min={self.config.dt_min:g} (allowed {allowed:.3e})", dt, allowed
                )
        return dt

    def step(self, dt_cap=None):
        cfg, grid, s = self.config, self.grid, self.state
        drift = transport.drift_field(grid, s.n, s.c, s.vel, self.spec)
        dt = self.choose_dt(drift)
        if dt_cap is not None and dt_cap < dt:
            dt = dt_cap
        n = transport.advance_cells(grid, s.n, s.c, s.vel, self.spec, dt, drift)
        vel, p = s.vel, s.p
        if cfg.fluid:
            vel, p = fluid.ns_step(grid, vel, p, n, self.phi, dt, tol=cfg.linear_tol)
        c = elliptic.solve_signal(grid, n, vel, tol=cfg.linear_tol)
        if not (np.all(np.isfinite(n)) and np.all(np.isfinite(c)) and np.all(np.isfinite(vel.u))
                and np.all(np.isfinite(vel.v))):
            raise FloatingPointError(f"non-finite values after step {self.steps + 1}")
        self.state = State(s.t + dt, n, c, vel, p, grid)
        self.steps += 1
        self.last_dt = dt
        self.max_mass_drift = max(self.max_mass_drift, abs(float(n.sum()) - self.sum0) / self.sum0)
        self.min_n = min(self.min_n, float(n.min()))
        self.min_c = min(self.min_c, float(c.min()))
        return dt

    def advance(self, steps):
        for _ in range(steps):
            self.step()
        return self.state

    def remaining(self):
        return self.config.t_end - self.state.t

    def done(self):
        return self.remaining() <= 1e-12 * self.config.t_end

    def record(self):
        rec = diagnostics.record(self.state, self.config, self.nbar0).as_row()
        return dict({"step": self.steps, "dt": self.last_dt}, **rec)


# --- persistence -------------------------------------------------------------


def write_snapshot(path, grid, t, name, data, binary=False):
    path = Path(path)
    header = f"{grid.nx} {grid.ny} {fmt(grid.lx)} {fmt(grid.ly)} {fmt(t)} {name}"
    np.savetxt(path, np.asarray(data, dtype=float), fmt="%.17g", header=header, comments="# ")
    out = {"txt": path.name}
    if binary:
        bpath = path.with_suffix(".bin")
        np.asarray(data, dtype="<f8").tofile(bpath)
        out["bin"] = bpath.name
    return out


def load_snapshot(path):
    """Read a text snapshot; returns ``(meta, array)``."""
    with open(path) as fh:
        parts = fh.readline().lstrip("#").split()
    meta = {"nx": int(parts[0]), "ny": int(parts[1]), "lx": float(parts[2]), "ly": float(parts[3]),
            "t": float(parts[4]), "field": parts[5]}
    data = np.loadtxt(path, ndmin=2).reshape(meta["nx"], meta["ny"])
    return meta, data


def read_diagnostics(path):
    """Diagnostics CSV as a dict of float arrays."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    rows = list(reader)
    return {k: np.array([float(r[k]) for r in rows]) for k in reader.fieldnames}


def _snapshot_fields(state):
    out = [("n", state.n), ("c", state.c)]
    if not state.vel.is_zero():
        uc, vc = state.vel.cell_centered()
        out += [("u", uc), ("v", vc)]
    return out


@dataclass
class RunOutput:
    out_dir: Path
    diagnostics: Path
    manifest: Path
    summary_path: Path
    summary: dict
    snapshots: list = field(default_factory=list)
    state: State = None

    def series(self):
        return read_diagnostics(self.diagnostics)


def _fit_report(series):
    fits = {}
    for col in FIT_COLUMNS:
        try:
            f = diagnostics.decay_rate(series["t"], series[col])
            fits[col] = {"lam": f.lam, "r_squared": f.r_squared, "points": f.points}
        except FitError as exc:
            fits[col] = {"lam": None, "r_squared": None, "error": str(exc)}
    return fits


def _growth_report(t, n_linf, t_end):
    t = np.asarray(t)
    n_linf = np.asarray(n_linf)
    half = 0.5 * t_end
    first, last = n_linf[t <= half], n_linf[t > half]
    if first.size == 0 or last.size == 0:
        return {"sup_n_linf": float(n_linf.max()), "ratio": None, "verdict": "undetermined"}
    ratio = float(last.max() / first.max())
    return {
        "sup_n_linf": float(n_linf.max()),
        "sup_first_half": float(first.max()),
        "sup_last_half": float(last.max()),
        "ratio": ratio,
        "verdict": "bounded" if ratio <= GROWTH_THRESHOLD else "growing",
    }


def threshold_report(config, mass):
    """Position of ``s0`` relative to the stability threshold, when defined."""
    if config.fluid or config.variant != "isotropic" or config.gamma < 1:
        return {"applicable": False, "reason": "needs fluid-free, isotropic sensitivity and gamma >= 1"}
    mu1 = diagnostics.mu1_rectangle(config.lx, config.ly)
    if config.gamma == 1:
        c_omega = 1.0
    else:
        c_omega = diagnostics.c_omega_from_lower_bound(elliptic.estimate_C_Omega(config.grid))
    s = diagnostics.s_star(config.gamma, mass, mu1, c_omega)
    return {"applicable": True, "s_star": s, "s0": config.s0, "ratio": config.s0 / s,
            "below_threshold": config.s0 < s, "mu1": mu1, "c_omega": c_omega,
            "isotropic_form": config.s1 == 0}


def _lyapunov_violations(y, rel=1e-12):
    y = np.asarray(y)
    return int(np.sum(np.diff(y) > rel * np.maximum(y[:-1], 1e-300)))


def run(config: SimConfig, out, raise_on_abort=True):
    """Run one simulation and persist its outputs in ``out``.

    On solver stalls, time-step collapse or non-finite values the rows
    written so far stay in the CSV, the last good state is stored as a
    snapshot and the summary status is ``aborted``; :class:`RunAborted` is
    raised unless ``raise_on_abort`` is false.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = config
    sim = Simulation(cfg)
    grid = sim.grid
    cols = diag_columns(cfg)
    csv_path = out / "diagnostics.csv"
    snaps = []
    if cfg.snapshots >= 2:
        snap_times = [cfg.t_end * k / (cfg.snapshots - 1) for k in range(cfg.snapshots)]
    elif cfg.snapshots == 1:
        snap_times = [cfg.t_end]
    else:
        snap_times = []

    def snapshot(label=None):
        idx = len(snaps)
        entry = {"index": idx, "t": sim.state.t, "step": sim.steps, "fields": {}}
        if label:
            entry["label"] = label
        for name, data in _snapshot_fields(sim.state):
            entry["fields"][name] = write_snapshot(out / f"snap_{idx:04d}_{name}.txt", grid, sim.state.t,
                                                   name, data, cfg.binary)
        snaps.append(entry)

    status, reason = "completed", None
    rows = []
    next_snap = 0
    next_rec = 0.0
    tiny = 1e-9 * max(cfg.every, cfg.dt_min)
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# schema={SCHEMA}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)

        def emit():
            row = sim.record()
            rows.append(row)
            writer.writerow([fmt(row[k]) for k in cols])

        try:
            while True:
                t = sim.state.t
                if cfg.every == 0 or t >= next_rec - tiny or sim.done():
                    emit()
                    if cfg.every > 0:
                        while next_rec <= t + tiny:
                            next_rec += cfg.every
                while next_snap < len(snap_times) and (t >= snap_times[next_snap] - tiny or sim.done()):
                    snapshot()
                    next_snap += 1
                if sim.done():
                    break
                cap = sim.remaining() if sim.remaining() < cfg.dt_max else None
                sim.step(dt_cap=cap)
        except (KSNSError, FloatingPointError, ArithmeticError) as exc:
            status, reason = "aborted", f"{type(exc).__name__}: {exc}"
            fh.flush()
            snapshot(label="last_good")
            abort_exc = exc

    series = {k: np.array([r[k] for r in rows]) for k in cols} if rows else {}
    summary = {
        "schema": SCHEMA,
        "status": status,
        "reason": reason,
        "t_final": sim.state.t,
        "steps": sim.steps,
        "config": cfg.to_mapping(),
        "final": {k: rows[-1][k] for k in ("mass", "n_l2", "n_linf", "dev_n_linf", "c_min", "kinetic",
                                           "lyapunov", "ctilde_h1")} if rows else {},
        "decay_fits": _fit_report(series) if len(rows) >= 2 else {},
        "threshold": threshold_report(cfg, sim.sum0 * grid.cell_area),
        "audits": {
            "mass": {"initial": sim.sum0 * grid.cell_area, "max_relative_drift": sim.max_mass_drift,
                     "ok": sim.max_mass_drift <= 1e-9},
            "positivity": {"min_n": sim.min_n, "min_c": sim.min_c, "ok": sim.min_n >= 0 and sim.min_c > 0},
            "lyapunov_increases": _lyapunov_violations(series["lyapunov"]) if rows else 0,
        },
        "growth": _growth_report(series["t"], series["n_linf"], cfg.t_end) if rows else {},
    }
    figures = []
    if cfg.figures and rows:
        from . import plotting

        figures.append(plotting.plot_time_series(series, out / "time_series.png").name)
        figures.append(plotting.plot_fields(sim.state, out / "final_fields.png").name)
    manifest = {"schema": SCHEMA, "diagnostics": csv_path.name, "summary": "summary.json",
                "snapshots": snaps, "binary_format": "little-endian float64, shape (nx, ny), row-major"
                if cfg.binary else None, "figures": figures}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default))
    result = RunOutput(out, csv_path, out / "manifest.json", out / "summary.json", summary, snaps, sim.state)
    if status == "aborted" and raise_on_abort:
        err = RunAborted(f"run aborted at t={sim.state.t:.6g}: {reason}")
        err.output = result
        raise err from abort_exc
    return result


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not serialisable: {type(obj)}")


# --- sweeps ------------------------------------------------------------------


def worker_count(requested=None):
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    if requested:
        return max(1, int(requested))
    return os.cpu_count() or 1


def _sweep_cell(args):
    index, cfg, params, out = args
    row = {"cell": index}
    row.update(params)
    try:
        res = run(cfg, out, raise_on_abort=False)
    except KSNSError as exc:
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return row
    s = res.summary
    row["status"] = s["status"]
    row["error"] = s["reason"] or ""
    row["t_final"] = s["t_final"]
    g = s["growth"]
    row["sup_n_linf"] = g.get("sup_n_linf")
    row["growth_ratio"] = g.get("ratio")
    row["verdict"] = g.get("verdict")
    for col in FIT_COLUMNS:
        fit = s["decay_fits"].get(col, {})
        row[f"lam_{col}"] = fit.get("lam")
        row[f"r2_{col}"] = fit.get("r_squared")
    th = s["threshold"]
    row["s_star"] = th.get("s_star")
    return row


SWEEP_COLUMNS = ("status", "t_final", "sup_n_linf", "growth_ratio", "verdict") + tuple(
    f"{p}_{c}" for c in FIT_COLUMNS for p in ("lam", "r2")
) + ("s_star", "error")


@dataclass
class SweepResult:
    rows: list
    table: Path


def parse_axis(text):
    """``"model.s0=0.1,0.2"`` -> ``("model.s0", [0.1, 0.2])``."""
    if "=" not in text:
        raise InvalidConfig([f"axis {text!r} must look like key=v1,v2,..."])
    key, vals = text.split("=", 1)
    out = []
    for v in vals.split(","):
        v = v.strip()
        try:
            out.append(json.loads(v))
        except ValueError:
            out.append(v)
    return key.strip(), out


def sweep(base: SimConfig, axes, out, workers=None, max_runs=256):
    """Run every cell of the Cartesian product of ``axes``.

    ``axes`` maps dotted config keys to value lists.  Failed cells are
    recorded and the sweep continues.  The aggregate table is sorted by cell
    index, so it does not depend on the worker count.
    """
    axes = list(axes.items()) if isinstance(axes, dict) else list(axes)
    if not axes:
        raise InvalidConfig(["sweep needs at least one axis"])
    keys = [k for k, _ in axes]
    combos = list(itertools.product(*[v for _, v in axes]))
    if len(combos) > max_runs:
        raise InvalidConfig([f"sweep has {len(combos)} cells, cap is {max_runs}"])
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for i, combo in enumerate(combos):
        params = dict(zip(keys, combo))
        cfg = base.with_overrides(params)
        jobs.append((i, cfg, params, str(out / f"cell_{i:03d}")))
    n_workers = min(worker_count(workers), len(jobs))
    if n_workers <= 1:
        rows = [_sweep_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs))
    rows.sort(key=lambda r: r["cell"])
    header = ("cell",) + tuple(keys) + SWEEP_COLUMNS
    table = out / "sweep.csv"
    with open(table, "w", newline="") as fh:
        fh.write(f"# schema={SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell_text(r.get(k)) for k in header])
    return SweepResult(rows, table)


def _cell_text(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt(v)
    return str(v)


# --- verification suites -----------------------------------------------------


def _order(hs, errs):
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def _suite_conservation(fast=False):
    steps = 500 if fast else 10_000
    worst = {}
    for mode in (False, True):
        for seed in (0, 1, 2):
            cfg = SimConfig(fluid=mode, dt_max=1e-3, t_end=steps * 1e-3, seed=seed,
                            n0=f"random(amplitude=0.5, seed={seed})",
                            u0="random(amplitude=0.1)" if mode else "0", s1=1.0, figures=False)
            sim = Simulation(cfg)
            sim.advance(steps)
            worst[f"{'fluid' if mode else 'free'}_seed{seed}"] = sim.max_mass_drift
    m = max(worst.values())
    return {"passed": m <= 1e-9, "measured": {"max_relative_drift": m, "runs": worst, "steps": steps},
            "threshold": {"max_relative_drift": 1e-9}}


def _suite_homogeneous(fast=False):
    t_end = 1.0 if fast else 10.0
    dev = {}
    for mode in (False, True):
        cfg = SimConfig(n0="1", u0="0", fluid=mode, dt_max=1e-2, t_end=t_end, figures=False)
        sim = Simulation(cfg)
        worst = float(np.abs(sim.state.n - sim.nbar0).max())
        while not sim.done():
            sim.step()
            worst = max(worst, float(np.abs(sim.state.n - sim.nbar0).max()))
        dev["fluid" if mode else "free"] = worst
    m = max(dev.values())
    return {"passed": m <= 1e-12, "measured": {"max_dev_n_linf": m, "runs": dev, "t_end": t_end},
            "threshold": {"max_dev_n_linf": 1e-12}}


def _elliptic_case(grid):
    X, _ = grid.centers()
    n = 1.0 + np.cos(np.pi * X)
    c = elliptic.solve_signal(grid, n)
    return n, c, 1.0 + np.cos(np.pi * X) / (1.0 + np.pi**2)


def _suite_elliptic_order(fast=False):
    ns = (32, 64, 128)
    hs, errs = [], []
    for N in ns:
        g = mesh.Grid(N, N)
        _, c, exact = _elliptic_case(g)
        hs.append(g.hx)
        errs.append(float(np.abs(c - exact).max()))
    order = _order(hs, errs)
    return {"passed": order >= 1.7, "measured": {"order": order, "errors": errs, "grids": ns,
                                                 "coefficient": 1.0 / (1.0 + np.pi**2)},
            "threshold": {"order": 1.7}}


def _suite_weighted_identity(fast=False):
    ns = (32, 64, 128)
    hs, res = [], []
    for N in ns:
        g = mesh.Grid(N, N)
        n, c, _ = _elliptic_case(g)
        hs.append(g.hx)
        res.append(elliptic.weighted_identity_residual(g, c, n, 1.0, 1.0))
    order = _order(hs, res)
    return {"passed": order >= 1.7 and res[0] > res[1] > res[2],
            "measured": {"order": order, "residuals": res, "grids": ns}, "threshold": {"order": 1.7}}


def _series_run(cfg):
    sim = Simulation(cfg)
    rows = [sim.record()]
    while not sim.done():
        cap = sim.remaining() if sim.remaining() < cfg.dt_max else None
        sim.step(dt_cap=cap)
        rows.append(sim.record())
    return {k: np.array([r[k] for r in rows]) for k in rows[0]}, sim


def case_i_config(t_end=1.0):
    return SimConfig(variant="rotational", angle=0.5 * math.pi, fluid=False, s0=1.0, s1=1.0,
                     n0="1 + 0.3*cos(pi*x/Lx)", dt_max=1e-3, t_end=t_end, every=0.0, figures=False)


def _suite_decay_case_i(fast=False):
    cfg = case_i_config(0.3 if fast else 1.0)
    series, _ = _series_run(cfg)
    y = series["lyapunov"]
    viol = _lyapunov_violations(y)
    fit = diagnostics.decay_rate(series["t"], y)
    target = 0.9 * 2.0 * math.pi**2
    return {"passed": viol == 0 and fit.lam >= target,
            "measured": {"violations": viol, "lam_Y": fit.lam, "r_squared": fit.r_squared},
            "threshold": {"violations": 0, "lam_Y": target}}


def case_ii_config(fraction, t_end=1.5):
    s_star = diagnostics.s_star(1.0, 1.0, math.pi**2, 1.0)
    return SimConfig(variant="isotropic", gamma=1.0, s1=0.0, s0=fraction * s_star, fluid=False,
                     n0="1 + 0.3*cos(pi*x/Lx)", dt_max=1e-3, t_end=t_end, every=0.01, figures=False)


def _suite_decay_case_ii(fast=False):
    out = {}
    ok = True
    for frac in (0.25, 0.5, 0.75):
        series, _ = _series_run(case_ii_config(frac, 0.5 if fast else 1.5))
        fn = diagnostics.decay_rate(series["t"], series["dev_n_linf"])
        fy = diagnostics.decay_rate(series["t"], series["lyapunov"])
        good = fn.lam > 0 and fy.lam > 0 and fn.r_squared >= 0.95 and fy.r_squared >= 0.95
        ok &= good
        out[f"{frac:g}"] = {"lam_n": fn.lam, "r2_n": fn.r_squared, "lam_Y": fy.lam, "r2_Y": fy.r_squared,
                            "passed": good}
    return {"passed": bool(ok), "measured": out, "threshold": {"lam": 0.0, "r_squared": 0.95}}


def probe_config(fast=False):
    return SimConfig(nx=64 if fast else 128, ny=64 if fast else 128, fluid=True, gamma=1.0, s0=1.0, s1=1.0,
                     phi="0.1*y", n0="peak(ratio=20, width=0.05)", u0="0", dt_max=1e-2,
                     t_end=2.0 if fast else 20.0, every=0.05, snapshots=21, figures=False)


_PROBE_CACHE = {}


def probe_run(fast=False, out=None):
    """The boundedness-probe run, cached per process."""
    key = (fast, out)
    if key not in _PROBE_CACHE:
        target = out or tempfile.mkdtemp(prefix="ksns_probe_")
        _PROBE_CACHE[key] = run(probe_config(fast), target)
    return _PROBE_CACHE[key]


def _suite_boundedness(fast=False):
    res = probe_run(fast)
    g = res.summary["growth"]
    min_c = res.summary["audits"]["positivity"]["min_c"]
    return {"passed": g["ratio"] is not None and g["ratio"] <= GROWTH_THRESHOLD and min_c > 0,
            "measured": {"ratio": g["ratio"], "sup_first_half": g.get("sup_first_half"),
                         "sup_last_half": g.get("sup_last_half"), "min_c": min_c},
            "threshold": {"ratio": GROWTH_THRESHOLD, "min_c": 0.0}}


MODULUS_DELTAS = (0.05, 0.1, 0.2, 0.3, 0.4)


def _suite_modulus(fast=False):
    res = probe_run(fast)
    grid = res.state.grid
    cs = [load_snapshot(res.out_dir / s["fields"]["c"]["txt"])[1] for s in res.snapshots]
    vals = diagnostics.concentration_modulus(grid, cs, MODULUS_DELTAS, beta=2.0, s1=res.summary["config"]["model.s1"])
    mono = bool(np.all(np.diff(vals) >= 0))
    ratio = float(vals[0] / vals[-1]) if vals[-1] > 0 else 0.0
    return {"passed": mono and ratio <= 0.2,
            "measured": {"deltas": list(MODULUS_DELTAS), "values": vals.tolist(), "monotone": mono,
                         "ratio_005_04": ratio, "snapshots": len(cs)},
            "threshold": {"ratio_005_04": 0.2}}


def _suite_inequalities(fast=False, trials=None, seed=0):
    trials = trials or (20 if fast else 100)
    summaries = [inequality_lab.run_ensemble(name, trials, seed)[1] for name in inequality_lab.CHECKS]
    summaries.append(inequality_lab.psi_summary()[1])
    total = sum(s["violations"] for s in summaries)
    return {"passed": total == 0, "measured": {"violations": total, "checks": summaries},
            "threshold": {"violations": 0}}


def _suite_determinism(fast=False):
    cfg = SimConfig(nx=32, ny=32, n0="random(amplitude=0.5)", fluid=True, u0="random(amplitude=0.1)",
                    t_end=0.05, every=0.0, figures=False)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        a = run(cfg, tmp / "a").diagnostics.read_bytes()
        b = run(cfg, tmp / "b").diagnostics.read_bytes()
        axes = {"model.s0": [0.5, 1.0], "seed": [0, 1]}
        s1 = sweep(cfg, axes, tmp / "s1", workers=1)
        s2 = sweep(cfg, axes, tmp / "s2", workers=2)
        same_table = s1.table.read_bytes() == s2.table.read_bytes()
        same_cells = all(
            (tmp / "s1" / f"cell_{i:03d}" / "diagnostics.csv").read_bytes()
            == (tmp / "s2" / f"cell_{i:03d}" / "diagnostics.csv").read_bytes()
            for i in range(4)
        )
    return {"passed": a == b and same_table and same_cells,
            "measured": {"repeat_identical": a == b, "sweep_table_identical": same_table,
                         "sweep_cells_identical": same_cells},
            "threshold": {"identical": True}}


SUITES = {
    "conservation": _suite_conservation,
    "homogeneous": _suite_homogeneous,
    "elliptic-order": _suite_elliptic_order,
    "weighted-identity": _suite_weighted_identity,
    "decay-case-i": _suite_decay_case_i,
    "decay-case-ii": _suite_decay_case_ii,
    "boundedness-probe": _suite_boundedness,
    "keypro-modulus": _suite_modulus,
    "inequalities": _suite_inequalities,
    "determinism": _suite_determinism,
}


def verify(suite, fast=False):
    """Run a named suite; returns ``{suite, passed, measured, threshold}``."""
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    report = SUITES[suite](fast=fast)
    return dict({"suite": suite}, **report)
