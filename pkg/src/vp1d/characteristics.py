"""Characteristic curves X' = V, V' = -E(s, X) under a recorded field history.

The v-tangent (dX/dv, dV/dv) and the delta-f weight w = F(V) - f are
carried along with the curve when requested. All routines are vectorised
over anchor points that share one anchor time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import OutOfDomainError
from .interpolation import lagrange3_sample
from .profiles import Grid


@dataclass
class CharacteristicPoint:
    X: np.ndarray
    V: np.ndarray
    s: float
    dXdv: np.ndarray = 0.0
    dVdv: np.ndarray = 1.0
    w: np.ndarray = 0.0

    @classmethod
    def anchor(cls, x, v, t, w=0.0):
        """Terminal data X = x, V = v, dX/dv = 0, dV/dv = 1 at time t."""
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        x, v = np.broadcast_arrays(x, v)
        return cls(X=x.copy(), V=v.copy(), s=float(t), dXdv=np.zeros_like(x),
                   dVdv=np.ones_like(x), w=np.broadcast_to(np.asarray(w, float), x.shape).copy())


class FieldSampler:
    """Field and density history, linear in time and cubic in x."""

    def __init__(self, times, xgrid: Grid, E, rho=None):
        self.times = np.asarray(times, float)
        self.xgrid = xgrid
        self.E = np.asarray(E, float)
        self.rho = None if rho is None else np.asarray(rho, float)
        if self.E.shape != (len(self.times), xgrid.n):
            raise ValueError(f"E history has shape {self.E.shape}, expected ({len(self.times)}, {xgrid.n})")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sampler times must be strictly increasing")
        self._x0 = xgrid.nodes[0]
        self._span = (self._x0, xgrid.nodes[-1])

    @classmethod
    def from_fields(cls, fields):
        fields = list(fields)
        return cls([f.t for f in fields], fields[0].xgrid,
                   np.array([f.E for f in fields]), np.array([f.rho for f in fields]))

    @property
    def t_range(self):
        return float(self.times[0]), float(self.times[-1])

    def _time_weights(self, s):
        t0, t1 = self.t_range
        tol = 1e-9 * max(1.0, abs(t1))
        if s < t0 - tol or s > t1 + tol:
            raise OutOfDomainError(f"time {s} outside sampler range [{t0}, {t1}]")
        s = min(max(s, t0), t1)
        k = int(np.clip(np.searchsorted(self.times, s) - 1, 0, len(self.times) - 2))
        a = (s - self.times[k]) / (self.times[k + 1] - self.times[k])
        return k, a

    def _coords(self, X):
        X = np.asarray(X, float)
        lo, hi = self._span
        if np.any(X < lo) or np.any(X > hi):
            raise OutOfDomainError(f"position outside sampled grid [{lo}, {hi}]")
        return (X - self._x0) / self.xgrid.delta

    def _sample(self, table, s, X):
        c = self._coords(X)
        if len(self.times) == 1:
            return lagrange3_sample(table[0], c)
        k, a = self._time_weights(s)
        return (1 - a) * lagrange3_sample(table[k], c) + a * lagrange3_sample(table[k + 1], c)

    def field(self, s, X):
        return self._sample(self.E, s, X)

    def density(self, s, X):
        if self.rho is None:
            raise ValueError("sampler has no density history")
        return self._sample(self.rho, s, X)


@dataclass
class Trajectory:
    s: np.ndarray
    X: np.ndarray
    V: np.ndarray
    dXdv: np.ndarray
    dVdv: np.ndarray
    w: np.ndarray

    def column(self, i):
        """Single-point view (i indexes the anchor)."""
        pick = (lambda a: a[:, i]) if np.ndim(self.X) == 2 else (lambda a: a)
        return Trajectory(self.s, pick(self.X), pick(self.V), pick(self.dXdv), pick(self.dVdv), pick(self.w))


def _integrate(point, sampler, s_target, dt, tangent=False, background=None, record=False):
    if not dt > 0:
        raise ValueError(f"substep must be positive, got {dt}")
    span = s_target - point.s
    n = int(np.ceil(abs(span) / dt - 1e-12)) if span != 0 else 0
    h = span / n if n else 0.0
    s = point.s
    X = np.array(point.X, float)
    V = np.array(point.V, float)
    Q = np.array(np.broadcast_to(point.dXdv, X.shape), float)
    P = np.array(np.broadcast_to(point.dVdv, X.shape), float)
    w = np.array(np.broadcast_to(point.w, X.shape), float)
    hist = [(s, X, V, Q, P, w)] if record else None

    E0 = sampler.field(s, X) if n else None
    rho0 = sampler.density(s, X) if (n and tangent) else None
    for _ in range(n):
        V_half = V - 0.5 * h * E0
        if background is not None:
            w = w + background(V_half) - background(V)
        X = X + h * V_half
        s = s + h
        E1 = sampler.field(s, X)
        V_new = V_half - 0.5 * h * E1
        if background is not None:
            w = w + background(V_new) - background(V_half)
        if tangent:
            P_half = P - 0.5 * h * rho0 * Q
            Q = Q + h * P_half
            rho1 = sampler.density(s, X)
            P = P_half - 0.5 * h * rho1 * Q
            rho0 = rho1
        V, E0 = V_new, E1
        if record:
            hist.append((s, X, V, Q, P, w))
    out = replace(point, X=X, V=V, s=float(s_target) if n else point.s, dXdv=Q, dVdv=P, w=w)
    if not record:
        return out
    cols = list(zip(*hist))
    traj = Trajectory(np.array(cols[0]), *(np.array(c) for c in cols[1:]))
    return out, traj


def trace(point: CharacteristicPoint, sampler: FieldSampler, s_target: float, dt: float,
          record: bool = False):
    """Velocity-Verlet integration of the characteristic system to s_target.

    Substeps have size <= dt; the direction follows sign(s_target - s).
    """
    return _integrate(point, sampler, s_target, dt, record=record)


def trace_with_tangent(point, sampler, s_target, dt, record=False):
    """trace plus d(dX/dv)/ds = dV/dv, d(dV/dv)/ds = -rho(s, X) dX/dv."""
    return _integrate(point, sampler, s_target, dt, tangent=True, record=record)


def evolve_weight(point, sampler, s_target, dt, bg, record=False):
    """trace plus the delta-f weight, dw/ds = F'(V) dV/ds = -E(s, X) F'(V).

    Each Verlet kick changes V at fixed X, so the weight increment over a
    kick is integrated exactly as F(V_after) - F(V_before).
    """
    return _integrate(point, sampler, s_target, dt, background=bg, record=record)


@dataclass
class Lemma2Report:
    passed: bool
    min_margin: float
    first_violation_s: Optional[float] = None
    first_violation_point: Optional[int] = None


def lemma2_monitor(traj: Trajectory, r_of_s: Callable, tol: float = 0.0) -> Lemma2Report:
    """Check |X(s)| >= R(s) - tol at every stored substep."""
    R = np.asarray(r_of_s(traj.s), float)
    X = np.abs(traj.X)
    margin = X - (R[:, None] if X.ndim == 2 else R) + tol
    bad = margin < 0
    if not np.any(bad):
        return Lemma2Report(True, float(np.min(margin)))
    if X.ndim == 2:
        step = int(np.argmax(np.any(bad, axis=1)))
        pt = int(np.argmax(bad[step]))
    else:
        step, pt = int(np.argmax(bad)), 0
    return Lemma2Report(False, float(np.min(margin)), float(traj.s[step]), pt)


def write_trajectory_csv(path, traj: Trajectory):
    if np.ndim(traj.X) != 1:
        raise ValueError("write one anchor at a time (use Trajectory.column)")
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["s", "X", "V", "dXdv", "dVdv", "w"])
        for row in zip(traj.s, traj.X, traj.V, traj.dXdv, traj.dVdv, traj.w):
            out.writerow([repr(float(c)) for c in row])
