"""Velocity moments of the deviation and the quadrature field law."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DomainCoverageError, SupportOverflowError
from .profiles import Grid, quadrature


@dataclass
class FieldState:
    """Charge density, field and current on one spatial grid at one time."""

    t: float
    xgrid: Grid
    rho: np.ndarray
    E: np.ndarray
    j: np.ndarray
    L_sup: float = 0.0

    def __post_init__(self):
        n = self.xgrid.n
        for name in ("rho", "E", "j"):
            if np.shape(getattr(self, name)) != (n,):
                raise ValueError(f"{name} has shape {np.shape(getattr(self, name))}, expected ({n},)")

    @property
    def x(self) -> np.ndarray:
        return self.xgrid.nodes

    def to_csv(self, path):
        write_field_csv(path, self)


def _check_velocity_coverage(f, tol):
    # f must be negligible on the velocity boundary rows
    edge = max(np.max(np.abs(f[:, 0])), np.max(np.abs(f[:, -1])))
    if edge > tol:
        raise DomainCoverageError(
            f"distribution is {edge:.3e} on the velocity grid boundary; enlarge the velocity extent")


def charge_density(state, bg, rule="trapezoid", coverage_tol=None) -> np.ndarray:
    """rho(x) = int (F(v) - f(x, v)) dv, per spatial node."""
    vgrid = state.vgrid
    if vgrid.extent < bg.support:
        raise DomainCoverageError("velocity grid does not cover the background support")
    if coverage_tol is not None:
        _check_velocity_coverage(state.f, coverage_tol)
    F = bg(vgrid.nodes)
    return quadrature(F[None, :] - state.f, vgrid.delta, axis=1, rule=rule)


def current_density(state, bg, rule="trapezoid", coverage_tol=None) -> np.ndarray:
    """j(x) = int v (F(v) - f(x, v)) dv, per spatial node."""
    vgrid = state.vgrid
    if vgrid.extent < bg.support:
        raise DomainCoverageError("velocity grid does not cover the background support")
    if coverage_tol is not None:
        _check_velocity_coverage(state.f, coverage_tol)
    v = vgrid.nodes
    F = bg(v)
    return quadrature(v[None, :] * (F[None, :] - state.f), vgrid.delta, axis=1, rule=rule)


def support_bound(rho, x, threshold) -> float:
    """Smallest L such that |rho| <= threshold for all |x| > L."""
    active = np.abs(rho) > threshold
    if not np.any(active):
        return 0.0
    return float(np.max(np.abs(x[active])))


def field_from_density(rho, xgrid: Grid, threshold=0.0):
    """E = 0.5 * (int_{-inf}^x rho - int_x^inf rho) for compactly supported rho.

    Computed as cumulative trapezoid minus half the total, which makes
    E(right end) = -E(left end) hold exactly in floating point. Returns
    (E, L_sup).
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (xgrid.n,):
        raise ValueError(f"rho has shape {rho.shape}, expected ({xgrid.n},)")
    edge = max(abs(rho[0]), abs(rho[-1]))
    if edge > threshold:
        raise SupportOverflowError(
            f"|rho| = {edge:.3e} at the spatial grid boundary exceeds {threshold:.3e}; "
            "the domain is too small for the charge support")
    cum = cumulative_trapezoid(rho, dx=xgrid.delta, initial=0.0)
    E = cum - 0.5 * cum[-1]
    return E, support_bound(rho, xgrid.nodes, threshold)


def field_state(state, bg, threshold=0.0, rule="trapezoid") -> FieldState:
    """Moments and field of a phase-space state in one call."""
    rho = charge_density(state, bg, rule=rule)
    j = current_density(state, bg, rule=rule)
    E, L_sup = field_from_density(rho, state.xgrid, threshold)
    return FieldState(state.t, state.xgrid, rho, E, j, L_sup)


def total_charge(field: FieldState) -> float:
    return float(np.trapezoid(field.rho, dx=field.xgrid.delta))


def continuity_residual(prev: FieldState, next: FieldState) -> np.ndarray:
    """Centered residual of d_t rho + d_x j = 0 between two field states."""
    if prev.rho.shape != next.rho.shape or prev.xgrid != next.xgrid:
        raise ValueError("field states live on different grids")
    dt = next.t - prev.t
    if not dt > 0:
        raise ValueError(f"next.t must exceed prev.t (got dt = {dt})")
    j_mid = 0.5 * (prev.j + next.j)
    return (next.rho - prev.rho) / dt + np.gradient(j_mid, prev.xgrid.delta)


def write_field_csv(path, field: FieldState):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "rho", "E", "j"])
        for row in zip(field.x, field.rho, field.E, field.j):
            w.writerow([repr(float(v)) for v in row])


def read_field_csv(path, t, xgrid=None) -> FieldState:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = data[:, 0]
    if xgrid is None:
        xgrid = Grid(float(x[-1]), len(x))
    return FieldState(t, xgrid, data[:, 1], data[:, 2], data[:, 3])
