"""Closed-form exterior solution, support radius, and checks against a run.

Outside the support radius R(t) the field is E0 * sign(x) * cos(omega t)
and the electrons are the background shifted by E0 * sign(x) / omega *
sin(omega t); inside it nothing is known in closed form, and every
evaluator here refuses interior points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (DegenerateFrequencyError, InsufficientDataError,
                     InsufficientHistoryError, InteriorPointError)
from .profiles import BackgroundProfile


def sign(x):
    """sign with sign(0) = +1."""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


@dataclass
class TheoryParams:
    e0: float
    omega: float
    radius: float
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    r_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    c1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    qg: np.ndarray = field(default_factory=lambda: np.zeros(0))
    q0: float = 0.0

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega if self.omega > 0 else np.inf

    @property
    def lemma1_bound(self) -> np.ndarray:
        return self.q0 + self.c1

    def r_at(self, t):
        """R(t) interpolated from the recorded series (R itself when none is recorded)."""
        if len(self.times) == 0:
            return np.full(np.shape(t), self.radius) if np.ndim(t) else self.radius
        if np.max(t) > self.times[-1] * (1 + 1e-12) + 1e-12:
            raise InsufficientHistoryError(f"R(t) requested at t = {np.max(t)} beyond recorded history")
        return np.interp(t, self.times, self.r_t)


def _require_exterior(t, x, params: TheoryParams):
    inside = np.abs(x) <= params.r_at(t)
    if np.any(inside):
        raise InteriorPointError(
            f"exterior formula evaluated at |x| <= R(t) (first offending x = {np.asarray(x)[inside].ravel()[0] if np.ndim(x) else x})")


def exterior_field(t, x, params: TheoryParams):
    """E0 * sign(x) * cos(omega t), valid for |x| > R(t)."""
    _require_exterior(t, x, params)
    return params.e0 * sign(x) * np.cos(params.omega * np.asarray(t))


def exterior_shift(t, x, params: TheoryParams):
    """Velocity offset V(0) - v of exterior characteristics."""
    if params.omega == 0:
        if params.e0 != 0:
            raise DegenerateFrequencyError("omega = 0 with a nonzero field amplitude")
        return np.zeros(np.broadcast(np.asarray(t), np.asarray(x)).shape)
    return params.e0 * sign(x) / params.omega * np.sin(params.omega * np.asarray(t))


def exterior_distribution(t, x, v, params: TheoryParams, bg: BackgroundProfile):
    """F(v + E0 sign(x) / omega * sin(omega t)), valid for |x| > R(t)."""
    _require_exterior(t, x, params)
    return bg(np.asarray(v) + exterior_shift(t, x, params))


@dataclass
class ExteriorSolution:
    params: TheoryParams
    background: BackgroundProfile

    def field(self, t, x):
        return exterior_field(t, x, self.params)

    def distribution(self, t, x, v):
        return exterior_distribution(t, x, v, self.params, self.background)


def support_radius(t, times, qg, enorm, radius):
    """R + t Q_g(t) + int_0^t int_tau^t ||E(s)|| ds dtau from a recorded history.

    The inner integral is taken from the cumulative trapezoid of ||E||,
    the outer by trapezoid over the stored steps.
    """
    times = np.asarray(times, float)
    if len(times) == 0 or t > times[-1] * (1 + 1e-12) + 1e-12 or t < times[0]:
        raise InsufficientHistoryError(f"history covers [{times[:1]}, {times[-1:]}] but t = {t}")
    enorm = np.asarray(enorm, float)
    keep = times < t
    ts = np.append(times[keep], t)
    es = np.append(enorm[keep], np.interp(t, times, enorm))
    q = float(np.interp(t, times, np.asarray(qg, float)))
    if ts.size < 2:
        return radius + t * q
    cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(ts) * (es[1:] + es[:-1]))])
    inner = cum[-1] - cum
    return radius + t * q + float(np.trapezoid(inner, ts))


@dataclass
class CheckReport:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    @property
    def margin(self) -> float:
        return self.threshold - self.value

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {status} value={self.value:.6e} threshold={self.threshold:.6e} {self.detail}".rstrip()


def lemma1_check(times, qg, c1, dv, qg0=None) -> CheckReport:
    """Q_g(t) <= Q_g(0) + C1(t) + dv at every recorded time."""
    qg = np.asarray(qg, float)
    c1 = np.asarray(c1, float)
    base = qg[0] if qg0 is None else qg0
    excess = qg - (base + c1 + dv)
    k = int(np.argmax(excess))
    passed = bool(np.all(excess <= 0))
    detail = f"min_margin={-excess.max():.6e}"
    if not passed:
        first = int(np.argmax(excess > 0))
        detail += f" first_violation_t={times[first]:.6f}"
    return CheckReport("lemma1_velocity_bound", passed, float(qg[k] - base - c1[k]), float(dv), detail)


@dataclass
class FitReport:
    amplitude: float
    sine: float
    frequency: float
    rms: float
    dev_amplitude: float
    dev_sine: float
    dev_frequency: float
    degenerate: bool = False
    probe: float = 0.0


def _zero_crossings(t, e):
    s = np.sign(e)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return t[idx] - e[idx] * (t[idx + 1] - t[idx]) / (e[idx + 1] - e[idx])


def fit_harmonic(t, e, omega0, iters=50):
    """Gauss-Newton fit of e(t) ~ a cos(W t) + b sin(W t) starting from W = omega0."""
    t = np.asarray(t, float)
    e = np.asarray(e, float)
    W = float(omega0)
    A = np.column_stack([np.cos(W * t), np.sin(W * t)])
    a, b = np.linalg.lstsq(A, e, rcond=None)[0]
    for _ in range(iters):
        c, s = np.cos(W * t), np.sin(W * t)
        r = e - (a * c + b * s)
        J = np.column_stack([c, s, t * (-a * s + b * c)])
        step = np.linalg.lstsq(J, r, rcond=None)[0]
        a, b, W = a + step[0], b + step[1], W + step[2]
        if abs(step[2]) <= 1e-15 * max(abs(W), 1.0) and np.all(np.abs(step[:2]) <= 1e-15 * (abs(a) + abs(b) + 1e-300)):
            break
    rms = float(np.sqrt(np.mean((e - (a * np.cos(W * t) + b * np.sin(W * t))) ** 2)))
    return float(a), float(b), float(W), rms


def theorem2_fit(times, e_series, params: TheoryParams, probe_x: float,
                 r_final: Optional[float] = None, noise_floor: float = 1e-12) -> FitReport:
    """Fit the exterior field history at one probe against E0 sign(x) cos(omega t)."""
    times = np.asarray(times, float)
    e = np.asarray(e_series, float)
    r_final = params.r_at(times[-1]) if r_final is None else r_final
    if abs(probe_x) <= r_final:
        raise InteriorPointError(f"probe {probe_x} lies inside R(T) = {r_final}")
    expected = params.e0 * float(sign(probe_x))
    if np.max(np.abs(e)) <= noise_floor:
        return FitReport(0.0, 0.0, float("nan"), 0.0, abs(expected), 0.0, float("nan"),
                         degenerate=True, probe=probe_x)
    zc = _zero_crossings(times, e)
    if len(zc) < 2:
        raise InsufficientDataError("fewer than two zero crossings; record at least one period")
    omega0 = np.pi / np.mean(np.diff(zc))
    if (times[-1] - times[0]) * omega0 < 2 * np.pi * (1 - 1e-9):
        raise InsufficientDataError("less than one full period recorded")
    a, b, W, rms = fit_harmonic(times, e, omega0)
    return FitReport(
        amplitude=a, sine=b, frequency=W, rms=rms,
        dev_amplitude=abs(a - expected), dev_sine=abs(b),
        dev_frequency=abs(W - params.omega), probe=probe_x,
    )


@dataclass
class Theorem1Report:
    passed: bool
    worst_value: float
    worst_t: float
    worst_x: float
    threshold: float

    def as_check(self) -> CheckReport:
        return CheckReport("theorem1_exterior_density", self.passed, self.worst_value, self.threshold,
                           f"worst_t={self.worst_t:.6f} worst_x={self.worst_x:.6f}")


def theorem1_check(snapshots: Sequence, r_of_t: Callable[[float], float], threshold: float) -> Theorem1Report:
    """max over |x| > R(t) of |rho| stays below threshold at every snapshot."""
    worst = (0.0, float("nan"), float("nan"))
    for fs in snapshots:
        x = fs.xgrid.nodes
        ext = np.abs(x) > r_of_t(fs.t)
        if not np.any(ext):
            continue
        vals = np.abs(fs.rho[ext])
        k = int(np.argmax(vals))
        if vals[k] > worst[0]:
            worst = (float(vals[k]), fs.t, float(x[ext][k]))
    return Theorem1Report(worst[0] <= threshold, worst[0], worst[1], worst[2], threshold)


def harmonic_residual(e, dt, omega):
    """Discrete (e'' + omega^2 e) on interior samples of a uniformly sampled series."""
    e = np.asarray(e, float)
    return (e[2:] - 2 * e[1:-1] + e[:-2]) / dt**2 + omega**2 * e[1:-1]


def a_priori_radius(t, params: TheoryParams, q_bound: float, e_bound: float):
    """Estimate of R(t) before simulating: Q_g <= q_bound, ||E|| <= e_bound."""
    t = np.asarray(t, float)
    return params.radius + t * q_bound + 0.5 * e_bound * t**2
