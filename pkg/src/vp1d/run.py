"""Run orchestration, artifact files, and the verify / compare drivers.

A run directory holds

    series.csv          one row per step (diagnostics named in SERIES_COLUMNS)
    theory.csv          closed-form predictions at the same times
    fields_t<t>.csv     x, rho, E, j at the snapshot times
    snapshot_t<t>.csv   f on the x-v grid at the snapshot times (grid solver only)
    field_history.npz   every full-step (t, rho, E, j), used to retrace characteristics
    config.echo         the resolved configuration
    plot_series.gp      gnuplot script for the main series
    status              "ok" or "FAILED: <message>"

With method "both" the two solvers write to subdirectories of the same names
as the methods.
"""

from __future__ import annotations

import csv
import glob
import logging
import os
import re
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .characteristics import (CharacteristicPoint, FieldSampler, lemma2_monitor, trace_with_tangent)
from .config import RunConfig, parse_config
from .errors import VP1DError
from .fields import FieldState, continuity_residual, read_field_csv, total_charge, write_field_csv
from .interpolation import lagrange3_sample
from .profiles import Grid
from .solver import (SLSettings, build_ensemble, initial_state, initialize_pic, step_deltaf_pic,
                     step_semilagrangian)
from .theory import (CheckReport, TheoryParams, exterior_distribution, lemma1_check,
                     support_radius, theorem1_check, theorem2_fit)

log = logging.getLogger(__name__)

SERIES_COLUMNS = [
    "step", "t", "E_probe_pos", "E_probe_neg", "E_norm", "total_charge", "E_right", "E_left",
    "L_sup", "Q_g", "Q_f", "R_t", "C1", "continuity_residual_rms", "gamma_right", "gamma_left",
    "rho_exterior_max", "f_min", "f_max",
]
THEORY_COLUMNS = ["t", "E_exterior_pos", "E_exterior_neg", "total_charge", "gamma_pos",
                  "R_t", "lemma1_bound"]
SUBDIRS = {"semilagrangian": "semilagrangian", "deltaf-pic": "deltaf-pic"}


class IncompatibleError(VP1DError):
    """Two artifact directories do not share a grid and time sampling."""


class MissingArtifactError(VP1DError):
    """An artifact directory lacks a required file."""


@dataclass
class RunArtifacts:
    directory: str
    config: RunConfig
    method: str
    series: Dict[str, np.ndarray]
    fields: List[FieldState]
    snapshot_steps: List[int]
    probes: tuple
    elapsed: float = 0.0
    children: Dict[str, "RunArtifacts"] = field(default_factory=dict)


def settings_for(cfg: RunConfig, method: str) -> SLSettings:
    th = cfg.thresholds
    return SLSettings(
        interpolation=cfg.interpolation,
        inflow=cfg.inflow,
        support_rel=th["pic_support_rel"] if method == "deltaf-pic" else th["support_rel"],
        support_abs=th["support_abs"],
        qg_rel=th["qg_rel"],
        undershoot_rel=th["undershoot_rel"],
        undershoot_fail_rel=th["undershoot_fail_rel"],
        clip=th["clip_undershoot"],
        field_solve=cfg.field_solve,
        quadrature=cfg.quadrature,
    )


def snapshot_steps(cfg: RunConfig) -> List[int]:
    steps = {0} | {int(round(s * cfg.steps)) for s in cfg.snapshot_fractions}
    return sorted(steps)


def _tag(t: float) -> str:
    return f"{t:.6f}"


def _row(step, t, fld: FieldState, diag):
    x = fld.xgrid.nodes
    ext = np.abs(x) > diag["R_t"]
    return {
        "step": step, "t": t,
        "E_norm": float(np.max(np.abs(fld.E))),
        "total_charge": total_charge(fld),
        "E_right": float(fld.E[-1]), "E_left": float(fld.E[0]),
        "L_sup": fld.L_sup,
        "rho_exterior_max": float(np.max(np.abs(fld.rho[ext]))) if np.any(ext) else 0.0,
        **diag,
    }


def _sl_driver(cfg, bg, init, settings, on_snapshot):
    state = initial_state(init, cfg.xgrid, cfg.vgrid, settings)
    F = bg(cfg.vgrid.nodes)

    def diag(s):
        return {"Q_g": s.qg, "Q_f": s.q_f, "R_t": s.r_t, "C1": s.c1,
                "gamma_right": s.gamma_right, "gamma_left": s.gamma_left,
                "f_min": float(np.min(s.f)), "f_max": float(np.max(s.f))}

    yield state.field, diag(state)
    on_snapshot(0, state.t, state.f, F)
    for k in range(1, cfg.steps + 1):
        state, _ = step_semilagrangian(state, cfg.time_step, bg, settings)
        yield state.field, diag(state)
        on_snapshot(k, state.t, state.f, F)


def _pic_driver(cfg, bg, init, settings, on_snapshot):
    margin = 1.0 + 2.0 * abs(cfg.e0) * cfg.final_time / max(cfg.omega, 1e-300)
    ens = build_ensemble(init, cfg.xgrid, cfg.vgrid, per_cell=cfg.particles_per_cell,
                         v_rows=cfg.particle_rows, t_final=cfg.final_time, kernel=cfg.kernel,
                         margin=margin)
    log.info("delta-f ensemble: %d particles", ens.size)
    ens, fld = initialize_pic(ens, cfg.xgrid, settings)
    nan = float("nan")

    def diag(e):
        return {"Q_g": e.qg, "Q_f": nan, "R_t": e.r_t, "C1": e.c1, "gamma_right": nan,
                "gamma_left": nan, "f_min": nan, "f_max": nan}

    yield fld, diag(ens)
    for _ in range(cfg.steps):
        ens, fld = step_deltaf_pic(ens, cfg.time_step, bg, cfg.xgrid, settings)
        yield fld, diag(ens)


def _probe_values(E_hist, xgrid: Grid, x):
    c = (x - xgrid.nodes[0]) / xgrid.delta
    if not 0 <= c <= xgrid.n - 1:
        return np.full(len(E_hist), np.nan)
    return lagrange3_sample(E_hist, np.array([c]))[:, 0]


def resolve_probes(cfg: RunConfig, r_final: float):
    if cfg.probes is not None:
        return tuple(cfg.probes)
    return (1.1 * r_final, -1.1 * r_final)


def _write_series(directory, series):
    with open(os.path.join(directory, "series.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        n = len(series["t"])
        for i in range(n):
            w.writerow([int(series["step"][i])] + [repr(float(series[c][i])) for c in SERIES_COLUMNS[1:]])


def read_series(directory) -> Dict[str, np.ndarray]:
    path = os.path.join(directory, "series.csv")
    if not os.path.exists(path):
        raise MissingArtifactError(f"{path} not found")
    data = np.genfromtxt(path, delimiter=",", names=True, ndmin=1)
    return {name: np.atleast_1d(data[name]).astype(float) for name in data.dtype.names}


def theory_params(cfg: RunConfig, series: Optional[Dict[str, np.ndarray]] = None) -> TheoryParams:
    if series is None:
        return TheoryParams(e0=cfg.e0, omega=cfg.omega, radius=cfg.radius)
    return TheoryParams(e0=cfg.e0, omega=cfg.omega, radius=cfg.radius, times=series["t"],
                        r_t=series["R_t"], c1=series["C1"], qg=series["Q_g"], q0=series["Q_g"][0])


def theory_table(cfg: RunConfig, series: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    t = series["t"]
    amp = cfg.e0 * np.cos(cfg.omega * t)
    gamma = cfg.e0 / cfg.omega * np.sin(cfg.omega * t) if cfg.omega > 0 else np.zeros_like(t)
    radius = np.array([support_radius(ti, t, series["Q_g"], series["E_norm"], cfg.radius) for ti in t])
    return {"t": t, "E_exterior_pos": amp, "E_exterior_neg": -amp, "total_charge": 2 * amp,
            "gamma_pos": gamma, "R_t": radius, "lemma1_bound": series["Q_g"][0] + series["C1"]}


def _write_table(path, columns, table):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in zip(*(table[c] for c in columns)):
            w.writerow([repr(float(v)) for v in row])


PLOT_SCRIPT = """# gnuplot script: gnuplot -p plot_series.gp
set datafile separator ','
set key autotitle columnhead
set multiplot layout 2,2
set title 'field at the probes'
plot 'series.csv' using 't':'E_probe_pos' with lines, '' using 't':'E_probe_neg' with lines, \\
     'theory.csv' using 't':'E_exterior_pos' with lines dashtype 2
set title 'support radius and measured support'
plot 'series.csv' using 't':'R_t' with lines, '' using 't':'L_sup' with lines
set title 'velocity support against its bound'
plot 'series.csv' using 't':'Q_g' with lines, 'theory.csv' using 't':'lemma1_bound' with lines
set title 'total charge'
plot 'series.csv' using 't':'total_charge' with lines, 'theory.csv' using 't':'total_charge' with lines
unset multiplot
"""


def write_snapshot_raster(path, x, v, f):
    """f on the grid: header row 'x\\v' then the v nodes, one row per x node."""
    header = "x\\v," + ",".join(repr(float(vv)) for vv in v)
    body = np.column_stack([x, f])
    np.savetxt(path, body, delimiter=",", header=header, comments="", fmt="%.17g")


def read_snapshot_raster(path):
    with open(path) as fh:
        v = np.array([float(s) for s in fh.readline().strip().split(",")[1:]])
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], v, data[:, 1:]


def _run_single(cfg: RunConfig, method: str, directory: str) -> RunArtifacts:
    os.makedirs(directory, exist_ok=True)
    for stale in glob.glob(os.path.join(directory, "*_t*.csv")):
        os.remove(stale)
    with open(os.path.join(directory, "config.echo"), "w") as fh:
        fh.write(cfg.echo())
    bg, init = cfg.case()
    settings = settings_for(cfg, method)
    snaps = set(snapshot_steps(cfg))
    x, v = cfg.xgrid.nodes, cfg.vgrid.nodes

    def on_snapshot(k, t, f, F):
        if k in snaps and cfg.write_snapshots:
            write_snapshot_raster(os.path.join(directory, f"snapshot_t{_tag(t)}.csv"), x, v, f)

    driver = _sl_driver if method == "semilagrangian" else _pic_driver
    rows, fields_hist = [], []
    started = time.time()
    status = "ok"
    error = None
    try:
        for k, (fld, diag) in enumerate(driver(cfg, bg, init, settings, on_snapshot)):
            t = k * cfg.time_step
            fld = FieldState(t, fld.xgrid, fld.rho, fld.E, fld.j, fld.L_sup)
            row = _row(k, t, fld, diag)
            row["continuity_residual_rms"] = (
                float(np.sqrt(np.mean(continuity_residual(fields_hist[-1], fld) ** 2)))
                if fields_hist else float("nan"))
            rows.append(row)
            fields_hist.append(fld)
            if k in snaps:
                write_field_csv(os.path.join(directory, f"fields_t{_tag(t)}.csv"), fld)
            if k % 50 == 0:
                log.info("%s step %d/%d t=%.4f |E|=%.4e R=%.3f", method, k, cfg.steps, t,
                         row["E_norm"], row["R_t"])
    except VP1DError as exc:
        status = f"FAILED: {type(exc).__name__}: {exc}"
        error = exc
    elapsed = time.time() - started

    series = {c: np.array([r.get(c, np.nan) for r in rows], float) for c in SERIES_COLUMNS
              if c not in ("E_probe_pos", "E_probe_neg")}
    probes = resolve_probes(cfg, series["R_t"][-1] if rows else cfg.radius)
    if rows:
        E_hist = np.array([f.E for f in fields_hist])
        series["E_probe_pos"] = _probe_values(E_hist, cfg.xgrid, max(probes))
        series["E_probe_neg"] = _probe_values(E_hist, cfg.xgrid, min(probes))
        if np.any(np.abs(probes) > cfg.x_extent):
            log.warning("probe %s lies beyond the grid extent %.3f", probes, cfg.x_extent)
        _write_series(directory, series)
        _write_table(os.path.join(directory, "theory.csv"), THEORY_COLUMNS, theory_table(cfg, series))
        np.savez_compressed(
            os.path.join(directory, "field_history.npz"),
            t=series["t"], x=x, rho=np.array([f.rho for f in fields_hist]), E=E_hist,
            j=np.array([f.j for f in fields_hist]), probes=np.array(probes, float),
        )
    with open(os.path.join(directory, "plot_series.gp"), "w") as fh:
        fh.write(PLOT_SCRIPT)
    with open(os.path.join(directory, "status"), "w") as fh:
        fh.write(status + "\n")
    if error is not None:
        raise error
    log.info("%s finished %d steps in %.1f s", method, cfg.steps, elapsed)
    return RunArtifacts(directory, cfg, method, series, fields_hist, sorted(snaps), probes, elapsed)


def run(cfg: RunConfig, directory: Optional[str] = None) -> RunArtifacts:
    """Advance the configured case to its final time and write the artifacts.

    On a numerical failure the partial series is still written, the status
    file records the error, and the exception propagates.
    """
    directory = directory or cfg.directory
    if cfg.method != "both":
        return _run_single(cfg, cfg.method, directory)
    os.makedirs(directory, exist_ok=True)
    children = {m: _run_single(cfg, m, os.path.join(directory, sub)) for m, sub in SUBDIRS.items()}
    sl = children["semilagrangian"]
    with open(os.path.join(directory, "status"), "w") as fh:
        fh.write("ok\n")
    return RunArtifacts(directory, cfg, "both", sl.series, sl.fields, sl.snapshot_steps, sl.probes,
                        sum(c.elapsed for c in children.values()), children)


# ---------------------------------------------------------------------------
# loading and checking


@dataclass
class LoadedRun:
    directory: str
    config: RunConfig
    series: Dict[str, np.ndarray]
    times: np.ndarray
    rho: np.ndarray
    E: np.ndarray
    j: np.ndarray
    probes: tuple
    method: str

    @property
    def xgrid(self) -> Grid:
        return self.config.xgrid

    def field(self, k) -> FieldState:
        return FieldState(float(self.times[k]), self.xgrid, self.rho[k], self.E[k], self.j[k])

    def _snap_time(self, tag: str) -> float:
        # file names carry 6 decimals; snap back to the recorded step time
        t = float(tag)
        k = int(np.argmin(np.abs(self.times - t)))
        return float(self.times[k]) if abs(self.times[k] - t) <= 1e-6 else t

    def snapshot_fields(self) -> List[FieldState]:
        out = []
        for path in sorted(glob.glob(os.path.join(self.directory, "fields_t*.csv"))):
            t = self._snap_time(re.search(r"fields_t([-0-9.]+)\.csv$", path).group(1))
            out.append(read_field_csv(path, t, self.xgrid))
        return sorted(out, key=lambda f: f.t)

    def snapshot_rasters(self):
        out = []
        for path in glob.glob(os.path.join(self.directory, "snapshot_t*.csv")):
            t = self._snap_time(re.search(r"snapshot_t([-0-9.]+)\.csv$", path).group(1))
            out.append((t, path))
        return sorted(out)

    def sampler(self) -> FieldSampler:
        return FieldSampler(self.times, self.xgrid, self.E, self.rho)


def load_run(directory) -> LoadedRun:
    for name in ("config.echo", "series.csv", "field_history.npz"):
        if not os.path.exists(os.path.join(directory, name)):
            raise MissingArtifactError(f"{os.path.join(directory, name)} not found")
    with open(os.path.join(directory, "config.echo")) as fh:
        cfg = parse_config(fh.read())
    series = read_series(directory)
    with np.load(os.path.join(directory, "field_history.npz")) as z:
        times, rho, E, j, probes = z["t"], z["rho"], z["E"], z["j"], tuple(z["probes"])
    method = cfg.method
    if method == "both":
        method = os.path.basename(os.path.normpath(directory))
    return LoadedRun(directory, cfg, series, times, rho, E, j, probes, method)


def _check(name, value, threshold, detail=""):
    value = float(value)
    return CheckReport(name, bool(np.isfinite(value) and value <= threshold), value, float(threshold), detail)


def check_steady(run: LoadedRun) -> List[CheckReport]:
    th = run.config.thresholds["steady_abs"]
    bg, _ = run.config.case()
    e_max = float(np.max(np.abs(run.E)))
    out = [_check("steady_field", e_max, th)]
    dev = 0.0
    for _, path in run.snapshot_rasters():
        _, v, f = read_snapshot_raster(path)
        dev = max(dev, float(np.max(np.abs(f - bg(v)[None, :]))))
    out.append(_check("steady_distribution", dev, th))
    return out


def check_theorem2_field(run: LoadedRun, params: TheoryParams) -> List[CheckReport]:
    th = run.config.thresholds
    s = run.series
    r_final = float(s["R_t"][-1])
    out = []
    signs = {}
    for label, probe, col in (("pos", max(run.probes), "E_probe_pos"), ("neg", min(run.probes), "E_probe_neg")):
        name = f"theorem2_field_{label}"
        try:
            fit = theorem2_fit(s["t"], s[col], params, probe, r_final, noise_floor=th["steady_abs"])
        except VP1DError as exc:
            out.append(CheckReport(name, False, float("nan"), 0.0, f"{type(exc).__name__}: {exc}"))
            continue
        if fit.degenerate:
            # a null series is the correct answer exactly when E0 vanishes
            ok = abs(params.e0) <= th["steady_abs"]
            out.append(CheckReport(name, ok, abs(params.e0), th["steady_abs"], "degenerate series"))
            continue
        e0 = abs(params.e0)
        signs[label] = float(np.sign(fit.amplitude))
        rel_w = fit.dev_frequency / params.omega
        rel_a = fit.dev_amplitude / e0
        rel_b = fit.dev_sine / e0
        detail = (f"probe={probe:.6f} amplitude={fit.amplitude:.6e} frequency={fit.frequency:.8f} "
                  f"sine={fit.sine:.3e} rms={fit.rms:.3e}")
        out.append(_check(name + "_frequency", rel_w, th["fit_frequency_rel"], detail))
        out.append(_check(name + "_amplitude", rel_a, th["fit_amplitude_rel"], detail))
        out.append(_check(name + "_sine", rel_b, th["fit_sine_rel"], detail))
    if len(signs) == 2:
        want = float(np.sign(params.e0))
        ok = signs["pos"] == want and signs["neg"] == -want
        out.append(CheckReport("theorem2_field_sign", ok, 0.0 if ok else 1.0, 0.0,
                               f"sign(a+)={signs['pos']:+.0f} sign(a-)={signs['neg']:+.0f}"))
    return out


def check_theorem2_distribution(run: LoadedRun, params: TheoryParams) -> List[CheckReport]:
    cfg = run.config
    bg, _ = cfg.case()
    tol = cfg.thresholds["distribution_rel"] * bg.peak
    rasters = [(t, p) for t, p in run.snapshot_rasters() if t > 0]
    if not rasters:
        return [CheckReport("theorem2_distribution", False, float("nan"), tol, "no snapshots after t = 0")]
    worst, where = 0.0, ""
    for t, path in rasters:
        x, v, f = read_snapshot_raster(path)
        xgrid = Grid(float(x[-1]), len(x))
        for probe in run.probes:
            c = (probe - x[0]) / xgrid.delta
            if not 0 <= c <= len(x) - 1:
                return [CheckReport("theorem2_distribution", False, float("inf"), tol,
                                    f"probe {probe} outside the grid")]
            f_probe = lagrange3_sample(f.T, np.array([c]))[:, 0]
            exact = exterior_distribution(t, probe, v, params, bg)
            err = float(np.max(np.abs(f_probe - exact)))
            if err > worst:
                worst, where = err, f"worst_t={t:.4f} worst_x={probe:.4f}"
    return [_check("theorem2_distribution", worst, tol, where)]


def check_theorem1(run: LoadedRun, params: TheoryParams) -> List[CheckReport]:
    th = run.config.thresholds
    dx = run.xgrid.delta
    rel = th["pic_support_rel"] if run.method == "deltaf-pic" else th["theorem1_rel"]
    # a round-off floor keeps a chargeless run from failing on its own noise
    threshold = max(rel * float(np.max(np.abs(run.rho))), th["support_abs"])
    # no claim is made inside a 2 dx buffer around R(t)
    report = theorem1_check(run.snapshot_fields(), lambda t: params.r_at(t) + 2 * dx, threshold)
    return [report.as_check()]


def check_causality(run: LoadedRun) -> List[CheckReport]:
    s = run.series
    excess = s["L_sup"] - (s["R_t"] + run.xgrid.delta)
    k = int(np.argmax(excess))
    return [CheckReport("support_within_radius", bool(np.all(excess <= 0)), float(excess[k]), 0.0,
                        f"worst_t={s['t'][k]:.4f}")]


def sample_anchors(run: LoadedRun, count: int, seed: int):
    """Exterior anchors at the final time with |v| <= Q_g(T).

    Positions are drawn in [1.05 R(T), min(1.5 R(T), L - 1)] with either sign;
    velocities are biased outward so the backward trace stays on the grid.
    """
    rng = np.random.default_rng(seed)
    s = run.series
    T, R, Q = float(s["t"][-1]), float(s["R_t"][-1]), float(s["Q_g"][-1])
    lo = 1.05 * R
    hi = min(1.5 * R, run.xgrid.extent - 1.0)
    if hi <= lo:
        raise VP1DError(f"no exterior room for anchors: R(T) = {R:.3f}, grid extent {run.xgrid.extent:.3f}")
    side = np.where(rng.random(count) < 0.5, -1.0, 1.0)
    r = rng.uniform(lo, hi, count)
    room = np.clip((run.xgrid.extent - 0.5 - r) / max(T, 1e-300), 0.0, Q)
    v_out = rng.uniform(-room, Q)
    return side * r, side * v_out, T


def check_characteristics(run: LoadedRun, params: TheoryParams) -> List[CheckReport]:
    th = run.config.thresholds
    count = int(th["anchors"])
    if count == 0 or len(run.times) < 2:
        return []
    try:
        x, v, T = sample_anchors(run, count, run.config.seed)
        point = CharacteristicPoint.anchor(x, v, T)
        end, traj = trace_with_tangent(point, run.sampler(), 0.0, run.config.time_step, record=True)
    except VP1DError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [CheckReport("tangent_flatness", False, float("nan"), th["tangent_abs"], msg),
                CheckReport("lemma2_exterior", False, float("nan"), 0.0, msg)]
    dev = np.abs(end.dVdv - 1.0)
    k = int(np.argmax(dev))
    out = [_check("tangent_flatness", dev[k], th["tangent_abs"],
                  f"anchors={count} worst_x={x[k]:.4f} worst_v={v[k]:.4f}")]
    tol = th["lemma2_cells"] * run.xgrid.delta
    rep = lemma2_monitor(traj, lambda s: params.r_at(s), tol)
    detail = f"anchors={count} min_margin={rep.min_margin:.6e}"
    if not rep.passed:
        detail += f" first_violation_s={rep.first_violation_s:.4f} anchor={rep.first_violation_point}"
    out.append(CheckReport("lemma2_exterior", rep.passed, -rep.min_margin, 0.0, detail))
    return out


def check_lemma1(run: LoadedRun) -> List[CheckReport]:
    s = run.series
    return [lemma1_check(s["t"], s["Q_g"], s["C1"], run.config.vgrid.delta)]


def check_conservation(run: LoadedRun) -> List[CheckReport]:
    cfg = run.config
    th = cfg.thresholds
    s = run.series
    q = s["total_charge"]
    scale = max(2 * abs(cfg.e0), float(np.max(np.abs(q))), 1e-300)
    identity = float(np.max(np.abs(q - 2 * s["E_right"])))
    out = [_check("charge_equals_twice_edge_field", identity / scale, th["charge_roundoff_rel"])]
    if abs(cfg.e0) > th["steady_abs"]:
        drift = float(np.max(np.abs(q - 2 * cfg.e0 * np.cos(cfg.omega * s["t"]))))
        out.append(_check("charge_follows_exterior_oscillation", drift / (2 * abs(cfg.e0)),
                          th["charge_rel"]))
    anti = np.abs(s["E_right"] + s["E_left"]) - (th["antisymmetry_rel"] * s["E_norm"] + 1e-14)
    k = int(np.argmax(anti))
    out.append(CheckReport("field_antisymmetry", bool(np.all(anti <= 0)),
                           float(abs(s["E_right"][k] + s["E_left"][k])),
                           float(th["antisymmetry_rel"] * s["E_norm"][k] + 1e-14), f"worst_t={s['t'][k]:.4f}"))
    return out


def continuity_rms(run: LoadedRun) -> float:
    """Space-time RMS of the discrete continuity residual over the whole run."""
    r = run.series["continuity_residual_rms"][1:]
    return float(np.sqrt(np.mean(r ** 2))) if r.size else float("nan")


def check_continuity(run: LoadedRun) -> List[CheckReport]:
    if len(run.times) < 2:
        return []
    dt = np.diff(run.times)[:, None]
    scale = float(np.sqrt(np.mean(((run.rho[1:] - run.rho[:-1]) / dt) ** 2)))
    rms = continuity_rms(run)
    if scale <= run.config.thresholds["steady_abs"]:
        # nothing moves: judge the residual absolutely
        return [_check("continuity_residual", rms, run.config.thresholds["steady_abs"])]
    return [_check("continuity_residual", rms / scale, run.config.thresholds["continuity_rel"],
                   f"rms={rms:.6e} rate_rms={scale:.6e}")]


def check_max_principle(run: LoadedRun) -> List[CheckReport]:
    s = run.series
    if not np.all(np.isfinite(s["f_max"])):
        return []
    cfg = run.config
    f0_max = float(s["f_max"][0])
    tol = cfg.thresholds["undershoot_fail_rel"] * f0_max
    over = float(np.max(s["f_max"]) - f0_max)
    under = float(-np.min(s["f_min"]))
    return [_check("maximum_principle", over, tol, f"max_f_excess={over:.3e}"),
            _check("positivity", under, tol, f"undershoot={under:.3e}")]


def verify_run(run: LoadedRun) -> List[CheckReport]:
    params = theory_params(run.config, run.series)
    checks: List[CheckReport] = []
    if run.config.epsilon == 0:
        checks += check_steady(run)
    checks += check_theorem2_field(run, params)
    if run.method == "semilagrangian" and run.config.write_snapshots:
        checks += check_theorem2_distribution(run, params)
    checks += check_theorem1(run, params)
    checks += check_causality(run)
    checks += check_characteristics(run, params)
    checks += check_lemma1(run)
    checks += check_conservation(run)
    if run.method == "semilagrangian":
        # particle shot noise in the deposited rho swamps the discrete time derivative
        checks += check_continuity(run)
    checks += check_max_principle(run)
    return checks


def write_report(directory, checks: List[CheckReport], extra: Optional[Dict[str, str]] = None):
    ok = all(c.passed for c in checks)
    with open(os.path.join(directory, "report.txt"), "w") as fh:
        fh.write(f"status: {'PASS' if ok else 'FAIL'}\n")
        for k, v in (extra or {}).items():
            fh.write(f"{k}: {v}\n")
        for c in checks:
            fh.write(c.line() + "\n")
    with open(os.path.join(directory, "checks.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check", "passed", "value", "threshold", "margin", "detail"])
        for c in checks:
            w.writerow([c.name, int(c.passed), repr(c.value), repr(c.threshold), repr(c.margin), c.detail])
    return ok


def verify(directory) -> List[CheckReport]:
    """Run every check on an artifact directory, write report.txt and checks.csv."""
    subdirs = [os.path.join(directory, s) for s in SUBDIRS.values()
               if os.path.isdir(os.path.join(directory, s))]
    if subdirs:
        checks = []
        for sub in subdirs:
            sub_checks = verify(sub)
            tag = os.path.basename(sub)
            checks += [CheckReport(f"{tag}/{c.name}", c.passed, c.value, c.threshold, c.detail)
                       for c in sub_checks]
        if len(subdirs) == 2:
            checks += compare(*subdirs)
        write_report(directory, checks)
        return checks
    if not os.path.exists(os.path.join(directory, "config.echo")):
        raise MissingArtifactError(f"{directory} has no config.echo")
    with open(os.path.join(directory, "status")) as fh:
        status = fh.read().strip()
    run_ = load_run(directory)
    checks = [CheckReport("run_completed", status == "ok", 0.0 if status == "ok" else 1.0, 0.0, status
                          if status != "ok" else "")]
    checks += verify_run(run_)
    write_report(directory, checks, {"method": run_.method, "steps": str(len(run_.times) - 1),
                                     "final_time": f"{run_.times[-1]:.6f}",
                                     "continuity_rms": f"{continuity_rms(run_):.6e}"})
    return checks


def relative_l2(a, b):
    """Per-row ||a - b|| / ||b||, rows with a zero reference compared absolutely."""
    num = np.linalg.norm(a - b, axis=1)
    den = np.linalg.norm(b, axis=1)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), num)


def compare(dir_a, dir_b) -> List[CheckReport]:
    """Relative L2 differences of rho and E between two runs on one grid and time sampling."""
    a, b = load_run(dir_a), load_run(dir_b)
    if a.xgrid != b.xgrid:
        raise IncompatibleError(f"grids differ: {a.xgrid} vs {b.xgrid}")
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=1e-12, atol=1e-12):
        raise IncompatibleError("time samplings differ")
    tol = a.config.thresholds["compare_rel"]
    out = []
    for name, x, y in (("rho", a.rho, b.rho), ("E", a.E, b.E)):
        r = relative_l2(x, y)
        k = int(np.argmax(r))
        out.append(_check(f"compare_{name}", r[k], tol, f"worst_t={a.times[k]:.4f}"))
    return out


def continuity_convergence(coarse_dir, fine_dir):
    """(coarse RMS, fine RMS, ratio) of the continuity residual for two resolutions."""
    rc = continuity_rms(load_run(coarse_dir))
    rf = continuity_rms(load_run(fine_dir))
    return rc, rf, rc / rf if rf > 0 else float("inf")


def theory_summary(cfg: RunConfig, n_rows: int = 9):
    """E0, omega and the a priori R(t) table, without simulating."""
    from .theory import a_priori_radius
    params = theory_params(cfg)
    t = np.linspace(0.0, cfg.final_time, n_rows)
    r = a_priori_radius(t, params, cfg.v_extent, 2 * abs(cfg.e0))
    return params, t, r
