"""Run configuration: INI-style `key = value` sections, validated and resolved.

Units are carried in key names (`final_time_periods`, `time_step`, ...);
everything is in the nondimensional variables of the equations as written.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError, NegativityError
from .profiles import Grid, build_standard_case, initial_field_amplitude

PROFILES = ("quartic_bump",)
METHODS = ("semilagrangian", "deltaf-pic", "both")

# (section, key) -> (type, default); a default of None means required
SCHEMA = {
    "profile": {
        "name": (str, None),
        "epsilon": (float, -0.1),
        "radius": (float, 1.0),
        "background_mass": (float, 1.0),
    },
    "grid": {
        "nx": (int, 2048),
        "nv": (int, 512),
        "x_extent": ("auto_float", "auto"),
        "v_extent": ("auto_float", "auto"),
        "interpolation": (str, "lagrange3"),
        "inflow": (str, "extrapolate"),
        "quadrature": (str, "trapezoid"),
    },
    "time": {
        "final_time_periods": (float, ""),
        "final_time": (float, ""),
        "steps_per_period": (int, 200),
        "time_step": (float, ""),
    },
    "solver": {
        "method": (str, "semilagrangian"),
        "field_solve": (bool, True),
        "particles_per_cell": (int, 1),
        "particle_rows": (int, 256),
        "kernel": (str, "quadratic"),
    },
    "output": {
        "directory": (str, "vp1d_run"),
        "snapshot_fractions": ("floats", "0.25, 0.5, 1.0"),
        "probes": ("auto_floats", "auto"),
        "seed": (int, 0),
        "write_snapshots": (bool, True),
    },
    "thresholds": {
        "support_rel": (float, 1e-8),
        "support_abs": (float, 1e-12),
        "pic_support_rel": (float, 1e-3),
        "qg_rel": (float, 1e-12),
        "undershoot_rel": (float, 1e-8),
        "undershoot_fail_rel": (float, 1e-2),
        "clip_undershoot": (bool, False),
        "steady_abs": (float, 1e-10),
        "theorem1_rel": (float, 1e-6),
        "fit_frequency_rel": (float, 1e-2),
        "fit_amplitude_rel": (float, 2e-2),
        "fit_sine_rel": (float, 1e-2),
        "distribution_rel": (float, 1e-3),
        "tangent_abs": (float, 1e-6),
        "lemma2_cells": (float, 2.0),
        "charge_rel": (float, 2e-2),
        "continuity_rel": (float, 1e-2),
        "charge_roundoff_rel": (float, 1e-12),
        "antisymmetry_rel": (float, 1e-12),
        "compare_rel": (float, 5e-2),
        "anchors": (int, 20),
    },
}


@dataclass
class RunConfig:
    profile: str
    epsilon: float
    radius: float
    background_mass: float
    nx: int
    nv: int
    x_extent: float
    v_extent: float
    interpolation: str
    inflow: str
    quadrature: str
    final_time: float
    time_step: float
    steps: int
    method: str
    field_solve: bool
    particles_per_cell: int
    particle_rows: int
    kernel: str
    directory: str
    snapshot_fractions: Tuple[float, ...]
    probes: Optional[Tuple[float, ...]]
    seed: int
    write_snapshots: bool
    thresholds: dict
    e0: float = 0.0
    omega: float = 0.0

    def case(self):
        """(background, initial data) of the selected profile."""
        return build_standard_case(self.epsilon, self.radius, self.background_mass)

    @property
    def xgrid(self) -> Grid:
        return Grid(self.x_extent, self.nx)

    @property
    def vgrid(self) -> Grid:
        return Grid(self.v_extent, self.nv)

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega if self.omega > 0 else float("inf")

    def echo(self) -> str:
        """Resolved configuration in the input format (parse_config round-trips it)."""
        values = {
            "profile": {"name": self.profile, "epsilon": self.epsilon, "radius": self.radius,
                        "background_mass": self.background_mass},
            "grid": {"nx": self.nx, "nv": self.nv, "x_extent": self.x_extent,
                     "v_extent": self.v_extent, "interpolation": self.interpolation,
                     "inflow": self.inflow, "quadrature": self.quadrature},
            "time": {"final_time": self.final_time, "time_step": self.time_step},
            "solver": {"method": self.method, "field_solve": self.field_solve,
                       "particles_per_cell": self.particles_per_cell,
                       "particle_rows": self.particle_rows, "kernel": self.kernel},
            "output": {"directory": self.directory,
                       "snapshot_fractions": ", ".join(repr(float(s)) for s in self.snapshot_fractions),
                       "probes": "auto" if self.probes is None else ", ".join(repr(float(p)) for p in self.probes),
                       "seed": self.seed, "write_snapshots": self.write_snapshots},
            "thresholds": dict(self.thresholds),
        }
        cp = configparser.ConfigParser()
        for section, items in values.items():
            cp[section] = {k: (repr(v) if isinstance(v, float) else str(v)) for k, v in items.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _convert(kind, raw, where):
    raw = raw.strip()
    try:
        if kind is str:
            return raw
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if kind == "auto_float":
            return None if raw.lower() == "auto" else float(raw)
        if kind == "floats":
            return tuple(float(s) for s in raw.split(",") if s.strip())
        if kind == "auto_floats":
            return None if raw.lower() == "auto" else tuple(float(s) for s in raw.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}") from None
    raise AssertionError(kind)


def _positive(name, value, strict=True):
    if (value <= 0) if strict else (value < 0):
        raise ConfigError(f"{name} must be {'positive' if strict else 'nonnegative'}, got {value}")


def parse_config(text: str) -> RunConfig:
    """Parse a configuration document, rejecting bad input and resolving derived values."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    raw = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    for section, keys in SCHEMA.items():
        for key, (kind, default) in keys.items():
            where = f"[{section}] {key}"
            if cp.has_option(section, key):
                raw[key] = _convert(kind, cp.get(section, key), where)
            elif default is None:
                raise ConfigError(f"missing required key {where}")
            elif default == "":
                raw[key] = None
            else:
                raw[key] = _convert(kind, str(default), where) if isinstance(default, str) else default

    if raw["name"] not in PROFILES:
        raise ConfigError(f"unknown profile {raw['name']!r}; available: {', '.join(PROFILES)}")
    if raw["method"] not in METHODS:
        raise ConfigError(f"unknown solver method {raw['method']!r}; choose from {METHODS}")
    if raw["interpolation"] not in ("lagrange3", "spline"):
        raise ConfigError(f"unknown interpolation {raw['interpolation']!r}")
    if raw["inflow"] not in ("extrapolate", "shifted_background"):
        raise ConfigError(f"unknown inflow rule {raw['inflow']!r}")
    if raw["kernel"] not in ("linear", "quadratic"):
        raise ConfigError(f"unknown deposition kernel {raw['kernel']!r}")
    if raw["quadrature"] not in ("trapezoid", "simpson"):
        raise ConfigError(f"unknown quadrature rule {raw['quadrature']!r}")
    for name in ("nx", "nv"):
        if raw[name] < 8:
            raise ConfigError(f"{name} must be at least 8, got {raw[name]}")
    _positive("radius", raw["radius"])
    _positive("background_mass", raw["background_mass"], strict=False)
    _positive("particles_per_cell", raw["particles_per_cell"])
    _positive("particle_rows", raw["particle_rows"])
    _positive("anchors", raw["anchors"], strict=False)
    for name in ("x_extent", "v_extent", "time_step"):
        if raw[name] is not None:
            _positive(name, raw[name])
    thresholds = {k: raw[k] for k in SCHEMA["thresholds"]}
    for k, v in thresholds.items():
        if not isinstance(v, bool):
            _positive(k, v, strict=False)

    try:
        bg, init = build_standard_case(raw["epsilon"], raw["radius"], raw["background_mass"])
    except NegativityError as exc:
        raise ConfigError(str(exc)) from exc
    omega = float(np.sqrt(bg.mass))
    # E0 from the closed-form-free quadrature on a fine private grid
    e0 = initial_field_amplitude(init, Grid(bg.support, 2049), Grid(raw["radius"], 2049))

    if (raw["final_time_periods"] is None) == (raw["final_time"] is None):
        raise ConfigError("give exactly one of [time] final_time_periods or final_time")
    if raw["final_time_periods"] is not None:
        if omega == 0:
            raise ConfigError("final_time_periods needs a nonzero plasma frequency")
        final_time = raw["final_time_periods"] * 2 * np.pi / omega
    else:
        final_time = raw["final_time"]
    _positive("final time", final_time, strict=False)

    if raw["time_step"] is not None:
        dt_req = raw["time_step"]
    else:
        _positive("steps_per_period", raw["steps_per_period"])
        if omega == 0:
            raise ConfigError("steps_per_period needs a nonzero plasma frequency; give time_step")
        dt_req = 2 * np.pi / omega / raw["steps_per_period"]
    steps = int(np.ceil(final_time / dt_req - 1e-9)) if final_time > 0 else 0
    dt = final_time / steps if steps else dt_req

    # velocity extent: support plus three times the exterior velocity excursion, +20% for
    # interpolation tails; spatial extent: a priori R(T) with ||E|| <= 2|E0|, plus probe room
    shift = abs(e0) / omega if omega > 0 else 0.0
    v_extent = raw["v_extent"] or 1.2 * (bg.support + 3 * shift)
    if v_extent < bg.support:
        raise ConfigError(f"v_extent {v_extent} does not cover the background support {bg.support}")
    if raw["x_extent"] is None:
        r_est = raw["radius"] + final_time * v_extent + abs(e0) * final_time**2
        x_extent = 1.1 * r_est + 2.0
    else:
        x_extent = raw["x_extent"]
    if x_extent <= raw["radius"]:
        raise ConfigError(f"x_extent {x_extent} does not cover the perturbation radius {raw['radius']}")

    fractions = raw["snapshot_fractions"]
    if any(not 0 <= s <= 1 for s in fractions):
        raise ConfigError("snapshot_fractions must lie in [0, 1]")

    return RunConfig(
        profile=raw["name"], epsilon=raw["epsilon"], radius=raw["radius"],
        background_mass=raw["background_mass"], nx=raw["nx"], nv=raw["nv"],
        x_extent=float(x_extent), v_extent=float(v_extent), interpolation=raw["interpolation"],
        inflow=raw["inflow"], quadrature=raw["quadrature"], final_time=float(final_time),
        time_step=float(dt), steps=steps, method=raw["method"], field_solve=raw["field_solve"],
        particles_per_cell=raw["particles_per_cell"], particle_rows=raw["particle_rows"],
        kernel=raw["kernel"], directory=raw["directory"], snapshot_fractions=tuple(fractions),
        probes=raw["probes"], seed=raw["seed"], write_snapshots=raw["write_snapshots"],
        thresholds=thresholds, e0=float(e0), omega=omega,
    )


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def config_fields():
    return [f.name for f in fields(RunConfig)]
