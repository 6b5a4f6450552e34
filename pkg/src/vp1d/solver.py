"""Time steppers: split semi-Lagrangian grid solver and delta-f particle solver."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InterpolationError, OutOfDomainError
from .fields import FieldState, field_from_density
from .interpolation import shift_lines
from .profiles import (BackgroundProfile, Grid, InitialData, density_support_q,
                       deviation_support_qg, quadrature)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SLSettings:
    interpolation: str = "lagrange3"
    # inflow beyond the x-grid: the edge column ("extrapolate") or F(v + gamma)
    inflow: str = "extrapolate"
    support_rel: float = 1e-8
    support_abs: float = 1e-12
    qg_rel: float = 1e-12
    undershoot_rel: float = 1e-8
    # undershoot beyond this (relative to max f0) is treated as a failure
    undershoot_fail_rel: float = 1e-2
    clip: bool = False
    field_solve: bool = True
    quadrature: str = "trapezoid"


@dataclass
class PhaseSpaceState:
    """Gridded distribution f(x_i, v_j) plus the running histories of a run."""

    t: float
    xgrid: Grid
    vgrid: Grid
    f: np.ndarray
    radius: float
    field: Optional[FieldState] = None
    qg: float = 0.0
    q_f: float = 0.0
    c1: float = 0.0
    # int_0^t s ||E(s)|| ds, equal to the double integral in R(t)
    moment: float = 0.0
    gamma_left: float = 0.0
    gamma_right: float = 0.0
    rho_max: float = 0.0
    f0_max: float = 0.0
    qg_threshold: float = 0.0
    clipped_mass: float = 0.0
    undershoot: float = 0.0

    @property
    def r_t(self) -> float:
        return self.radius + self.t * self.qg + self.moment

    @property
    def enorm(self) -> float:
        return float(np.max(np.abs(self.field.E))) if self.field is not None else 0.0


def _field_threshold(rho_max, settings):
    return max(settings.support_rel * rho_max, settings.support_abs)


def compute_field(t, f, xgrid, vgrid, F, settings, rho_max, solve=True):
    """Moments and field of a gridded distribution. Returns (FieldState, rho_max)."""
    g = F[None, :] - f
    rho = quadrature(g, vgrid.delta, axis=1, rule=settings.quadrature)
    j = quadrature(vgrid.nodes[None, :] * g, vgrid.delta, axis=1, rule=settings.quadrature)
    rho_max = max(rho_max, float(np.max(np.abs(rho))))
    if solve:
        E, L_sup = field_from_density(rho, xgrid, _field_threshold(rho_max, settings))
    else:
        E, L_sup = np.zeros_like(rho), 0.0
    return FieldState(t, xgrid, rho, E, j, L_sup), rho_max


def initial_state(init: InitialData, xgrid: Grid, vgrid: Grid,
                  settings: SLSettings = SLSettings()) -> PhaseSpaceState:
    x = xgrid.nodes
    v = vgrid.nodes
    F = init.background(v)
    f = init(x[:, None], v[None, :]).astype(float)
    g_max = float(np.max(np.abs(F[None, :] - f)))
    f0_max = float(np.max(f))
    # a zero deviation still needs a threshold above round-off
    scale = g_max if g_max > 0 else max(f0_max, 1.0)
    thr = settings.qg_rel * scale
    fld, rho_max = compute_field(0.0, f, xgrid, vgrid, F, settings, 0.0, settings.field_solve)
    qg = deviation_support_qg(f, v, F, thr)
    q_f = density_support_q(f, v, thr)
    return PhaseSpaceState(t=0.0, xgrid=xgrid, vgrid=vgrid, f=f, radius=init.radius,
                           field=fld, qg=qg, q_f=q_f, rho_max=rho_max, f0_max=f0_max,
                           qg_threshold=thr)


def _advect_x(f, vgrid, xgrid, F_of, gamma_left, gamma_right, tau, settings):
    v = vgrid.nodes
    disp = v * tau / xgrid.delta
    if settings.inflow == "shifted_background":
        lo, hi = F_of(v + gamma_left), F_of(v + gamma_right)
    elif settings.inflow == "extrapolate":
        lo, hi = f[0, :], f[-1, :]
    else:
        raise ValueError(f"unknown inflow rule {settings.inflow!r}")
    return shift_lines(f, disp, axis=0, lo=lo, hi=hi, method=settings.interpolation)


def _advect_v(f, E, vgrid, dt, settings):
    # f(x, v) <- f(x, v + E dt): the acceleration is -E
    disp = -E * dt / vgrid.delta
    return shift_lines(f, disp, axis=1, lo=0.0, hi=0.0, method=settings.interpolation)


def step_semilagrangian(state: PhaseSpaceState, dt: float, bg: BackgroundProfile,
                        settings: SLSettings = SLSettings()):
    """One Strang step x/2 - v - x/2 with the field solved at the half step.

    Returns (new state, mid-step field). The new state carries its own
    full-step field and updated Q_g, C1 and R(t) accumulators.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    xg, vg = state.xgrid, state.vgrid
    v = vg.nodes
    F = bg(v)

    f = _advect_x(state.f, vg, xg, bg, state.gamma_left, state.gamma_right, 0.5 * dt, settings)
    mid, rho_max = compute_field(state.t + 0.5 * dt, f, xg, vg, F, settings, state.rho_max,
                                 settings.field_solve)
    f = _advect_v(f, mid.E, vg, dt, settings)
    # exterior columns have been shifted by the boundary field
    gamma_left = state.gamma_left + mid.E[0] * dt
    gamma_right = state.gamma_right + mid.E[-1] * dt
    f = _advect_x(f, vg, xg, bg, gamma_left, gamma_right, 0.5 * dt, settings)

    f_min = float(np.min(f))
    undershoot = max(state.undershoot, -f_min)
    clipped = state.clipped_mass
    if f_min < -settings.undershoot_fail_rel * state.f0_max:
        raise InterpolationError(
            f"distribution undershoot {f_min:.3e} at t = {state.t + dt:.4f} exceeds "
            f"{settings.undershoot_fail_rel:g} * max f0")
    tol = settings.undershoot_rel * state.f0_max
    if settings.clip and f_min < -tol:
        neg = f < -tol
        clipped += float(-np.sum(f[neg]) * xg.delta * vg.delta)
        f = np.where(neg, 0.0, f)
        log.debug("clipped undershoot at t=%.4f, total clipped mass %.3e", state.t + dt, clipped)

    t_new = state.t + dt
    full, rho_max = compute_field(t_new, f, xg, vg, F, settings, rho_max, settings.field_solve)
    e_old, e_new = state.enorm, float(np.max(np.abs(full.E)))
    new = replace(
        state,
        t=t_new,
        f=f,
        field=full,
        qg=deviation_support_qg(f, v, F, state.qg_threshold, state.qg),
        q_f=density_support_q(f, v, state.qg_threshold, state.q_f),
        c1=state.c1 + 0.5 * dt * (e_old + e_new),
        moment=state.moment + 0.5 * dt * (state.t * e_old + t_new * e_new),
        gamma_left=gamma_left,
        gamma_right=gamma_right,
        rho_max=rho_max,
        clipped_mass=clipped,
        undershoot=undershoot,
    )
    return new, mid


# ---------------------------------------------------------------------------
# delta-f particle solver


@dataclass
class ParticleEnsemble:
    """Lattice-started particles carrying the deviation g = F - f as weights.

    Each particle keeps its initial density value `f0`; since f is constant
    along characteristics the weight is w = F(V) - f0, which is the exact
    integral of dw/ds = -E F'(V) along the discrete path.
    """

    t: float
    x: np.ndarray
    v: np.ndarray
    f0: np.ndarray
    w: np.ndarray
    volume: float
    kernel: str = "linear"
    E_edge: float = 0.0
    qg: float = 0.0
    c1: float = 0.0
    moment: float = 0.0
    radius: float = 0.0
    rho_max: float = 0.0
    qg_threshold: float = 0.0
    enorm: float = 0.0
    # grid field at time t, drives the first kick of the next step
    E_grid: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.x.size

    @property
    def r_t(self) -> float:
        return self.radius + self.t * self.qg + self.moment


def build_ensemble(init: InitialData, xgrid: Grid, vgrid: Grid, *, per_cell: int = 1,
                   v_rows: int = 256, t_final: float = 0.0, kernel: str = "linear",
                   margin: float = 1.0) -> ParticleEnsemble:
    """Uniform lattice covering the grid plus an inflow buffer of width vmax * t_final.

    The x spacing is dx / per_cell so that rigidly moving rows deposit a
    spatially uniform density with the linear kernel.
    """
    if per_cell < 1 or v_rows < 2:
        raise ValueError("need per_cell >= 1 and v_rows >= 2")
    dxp = xgrid.delta / per_cell
    vmax = vgrid.extent
    buffer = vmax * t_final + margin
    n_half = int(np.ceil((xgrid.extent + buffer) / dxp))
    xs = (np.arange(-n_half, n_half) + 0.5) * dxp
    dvp = 2.0 * vmax / v_rows
    vs = -vmax + (np.arange(v_rows) + 0.5) * dvp
    X, V = np.meshgrid(xs, vs, indexing="ij")
    X, V = X.ravel(), V.ravel()
    f0 = init(X, V)
    w = init.background(V) - f0
    g_max = float(np.max(np.abs(w))) if w.size else 0.0
    return ParticleEnsemble(t=0.0, x=X, v=V, f0=f0, w=w, volume=dxp * dvp, kernel=kernel,
                            radius=init.radius, qg_threshold=1e-12 * (g_max or 1.0))


def _kernel_nodes(x, xgrid, kernel):
    """Node indices and weights (relative to an extended grid with 2 ghost nodes per side)."""
    s = (x - xgrid.nodes[0]) / xgrid.delta
    if kernel == "linear":
        i = np.floor(s).astype(np.int64)
        frac = s - i
        return [(i, 1.0 - frac), (i + 1, frac)]
    if kernel == "quadratic":
        i = np.rint(s).astype(np.int64)
        d = s - i
        return [(i - 1, 0.5 * (0.5 - d) ** 2), (i, 0.75 - d * d), (i + 1, 0.5 * (0.5 + d) ** 2)]
    raise ValueError(f"unknown kernel {kernel!r}")


class _Stencil:
    """Kernel node indices and weights for one set of particle positions.

    Indices refer to the grid extended by two ghost nodes per side; nodes
    beyond the ghosts are routed to a discard bin.
    """

    GHOST = 2

    def __init__(self, x, xgrid: Grid, kernel: str):
        n = xgrid.n
        pairs = _kernel_nodes(x, xgrid, kernel)
        self.n = n
        self.idx = np.stack([i for i, _ in pairs]) + self.GHOST
        self.k = np.stack([k for _, k in pairs])
        size = n + 2 * self.GHOST
        self.dump = size
        self.bins = np.where((self.idx >= 0) & (self.idx < size), self.idx, size).ravel()
        self.clipped = np.clip(self.idx - self.GHOST, 0, n - 1)

    def deposit(self, w):
        total = np.bincount(self.bins, weights=(self.k * w).ravel(), minlength=self.dump + 1)
        return total[self.GHOST:self.GHOST + self.n]

    def gather(self, E):
        return np.sum(self.k * E[self.clipped], axis=0)


def deposit(ens: ParticleEnsemble, xgrid: Grid, weights=None) -> np.ndarray:
    """rho on the grid from particle weights; particles beyond the grid are dropped."""
    w = ens.w if weights is None else weights
    return _Stencil(ens.x, xgrid, ens.kernel).deposit(w) * ens.volume / xgrid.delta


def gather(E, x, xgrid: Grid, kernel="linear"):
    """Field at particle positions; outside the grid the edge values continue."""
    return _Stencil(x, xgrid, kernel).gather(np.asarray(E, float))


def _field_from_weights(t, ens, xgrid, settings, w, stencil, with_current=True):
    scale = ens.volume / xgrid.delta
    rho = stencil.deposit(w) * scale
    rho_max = max(ens.rho_max, float(np.max(np.abs(rho))))
    E, L_sup = field_from_density(rho, xgrid, _field_threshold(rho_max, settings))
    j = stencil.deposit(ens.v * w) * scale if with_current else np.zeros_like(rho)
    return FieldState(t, xgrid, rho, E, j, L_sup), rho_max


def pic_field(t, ens, xgrid, settings, weights=None):
    w = ens.w if weights is None else weights
    return _field_from_weights(t, ens, xgrid, settings, w, _Stencil(ens.x, xgrid, ens.kernel))


def initialize_pic(ens: ParticleEnsemble, xgrid: Grid, settings: SLSettings = SLSettings()):
    """Deposit the initial weights and return (ensemble, field at t = 0)."""
    fld, rho_max = pic_field(ens.t, ens, xgrid, settings)
    active = np.abs(ens.w) > ens.qg_threshold
    qg = float(np.max(np.abs(ens.v[active]))) if np.any(active) else 0.0
    ens = replace(ens, E_grid=fld.E, rho_max=rho_max, qg=qg,
                  enorm=float(np.max(np.abs(fld.E))), E_edge=float(fld.E[-1]))
    return ens, fld


def step_deltaf_pic(ens: ParticleEnsemble, dt: float, bg: BackgroundProfile, xgrid: Grid,
                    settings: SLSettings = SLSettings(), limit: Optional[float] = None):
    """Kick-drift-kick step of the delta-f ensemble. Returns (ensemble, field at t + dt).

    The weights used for the deposit at t + dt are evaluated at a predicted
    end-of-step velocity so that the deposited charge is second order.
    """
    if ens.E_grid is None:
        raise ValueError("ensemble not initialised; call initialize_pic first")
    v_half = ens.v - 0.5 * dt * gather(ens.E_grid, ens.x, xgrid, ens.kernel)
    x_new = ens.x + dt * v_half
    if limit is not None and np.max(np.abs(x_new)) > limit:
        raise OutOfDomainError("particle left the particle domain; enlarge the buffer")
    stencil = _Stencil(x_new, xgrid, ens.kernel)
    moved = replace(ens, x=x_new)
    # predictor: old field at the new positions
    v_pred = v_half - 0.5 * dt * stencil.gather(ens.E_grid)
    fld_pred, _ = _field_from_weights(ens.t + dt, moved, xgrid, settings, bg(v_pred) - ens.f0,
                                      stencil, with_current=False)
    v_new = v_half - 0.5 * dt * stencil.gather(fld_pred.E)
    moved = replace(moved, v=v_new, w=bg(v_new) - ens.f0)
    fld, rho_max = _field_from_weights(ens.t + dt, moved, xgrid, settings, moved.w, stencil)

    t_new = ens.t + dt
    e_new = float(np.max(np.abs(fld.E)))
    active = np.abs(moved.w) > ens.qg_threshold
    qg_now = float(np.max(np.abs(v_new[active]))) if np.any(active) else 0.0
    new = replace(
        moved,
        t=t_new,
        E_grid=fld.E,
        E_edge=float(fld.E[-1]),
        rho_max=rho_max,
        qg=max(ens.qg, qg_now),
        c1=ens.c1 + 0.5 * dt * (ens.enorm + e_new),
        moment=ens.moment + 0.5 * dt * (ens.t * ens.enorm + t_new * e_new),
        enorm=e_new,
    )
    return new, fld
