"""Background ion profile, initial electron data, grids and derived constants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _integrate

from .errors import DomainCoverageError, NegativityError

# normalisation of the quartic bump: int_{-1}^{1} (1 - s^2)^2 ds = 16/15
BUMP_INTEGRAL = 16.0 / 15.0


@dataclass(frozen=True)
class Grid:
    """Uniform node set on the symmetric interval [-extent, extent]."""

    extent: float
    n: int

    def __post_init__(self):
        if not self.extent > 0:
            raise ValueError(f"grid extent must be positive, got {self.extent}")
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 nodes, got {self.n}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.n)

    @property
    def delta(self) -> float:
        return 2.0 * self.extent / (self.n - 1)


# the two roles share one implementation
SpatialGrid = Grid
VelocityGrid = Grid


def quadrature(values, dx, axis=-1, rule="trapezoid"):
    """Composite quadrature of uniformly sampled values along `axis`."""
    if rule == "trapezoid":
        return np.trapezoid(values, dx=dx, axis=axis)
    if rule == "simpson":
        return _integrate.simpson(values, dx=dx, axis=axis)
    raise ValueError(f"unknown quadrature rule {rule!r}")


def quartic_bump(s):
    """(1 - s^2)^2 on |s| <= 1, zero outside. C^1 with compact support."""
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) <= 1.0, (1.0 - s * s) ** 2, 0.0)


def quartic_bump_prime(s):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) <= 1.0, -4.0 * s * (1.0 - s * s), 0.0)


@dataclass(frozen=True)
class BackgroundProfile:
    """Even, nonnegative, compactly supported ion density F(v).

    `support` is the half-width Q_F outside of which F vanishes; `mass`
    is the closed-form value of the integral of F when it is known.
    """

    density: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    support: float
    mass: Optional[float] = None
    name: str = "custom"

    def __call__(self, v):
        return self.density(v)

    def prime(self, v):
        return self.derivative(v)

    @property
    def peak(self) -> float:
        return float(self.density(np.zeros(1))[0])

    @classmethod
    def quartic(cls, mass: float = 1.0, width: float = 1.0) -> "BackgroundProfile":
        """F(v) = c (1 - (v/width)^2)_+^2 scaled so that its integral is `mass`."""
        if mass < 0:
            raise NegativityError(f"background mass must be nonnegative, got {mass}")
        c = mass / (BUMP_INTEGRAL * width)
        return cls(
            density=lambda v: c * quartic_bump(np.asarray(v) / width),
            derivative=lambda v: (c / width) * quartic_bump_prime(np.asarray(v) / width),
            support=width,
            mass=mass,
            name="quartic_bump",
        )


@dataclass(frozen=True)
class InitialData:
    """Electron density f0(x, v) equal to the background for |x| > radius."""

    density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    radius: float
    background: BackgroundProfile
    # deviation g0 = F - f0 vanishes for |v| beyond this
    velocity_support: float = 0.0

    def __call__(self, x, v):
        return self.density(x, v)

    def deviation(self, x, v):
        return self.background(v) - self.density(x, v)


def build_standard_case(epsilon: float, radius: float = 1.0, mass: float = 1.0):
    """Quartic-bump background with a quartic-bump density perturbation.

    f0(x, v) = F(v) * (1 + epsilon * psi(x / radius)). Returns the pair
    (background, initial data).
    """
    if epsilon <= -1.0:
        raise NegativityError(f"epsilon = {epsilon} makes f0 negative (need epsilon > -1)")
    if radius <= 0:
        raise ValueError(f"perturbation radius must be positive, got {radius}")
    bg = BackgroundProfile.quartic(mass=mass)

    def f0(x, v):
        x, v = np.broadcast_arrays(np.asarray(x, float), np.asarray(v, float))
        return bg(v) * (1.0 + epsilon * quartic_bump(x / radius))

    init = InitialData(density=f0, radius=radius, background=bg,
                       velocity_support=bg.support if epsilon != 0 else 0.0)
    return bg, init


def _require_covers(grid: Grid, half_width: float, what: str):
    if grid.extent < half_width:
        raise DomainCoverageError(
            f"grid extent {grid.extent} does not cover {what} half-width {half_width}")


def plasma_frequency(bg: BackgroundProfile, vgrid: Grid, rule="trapezoid") -> float:
    """sqrt of the background integral; closed form used when available."""
    _require_covers(vgrid, bg.support, "background support")
    if bg.mass is not None:
        moment = bg.mass
    else:
        moment = float(quadrature(bg(vgrid.nodes), vgrid.delta, rule=rule))
    return float(np.sqrt(max(moment, 0.0)))


def initial_field_amplitude(init: InitialData, vgrid: Grid, xgrid: Optional[Grid] = None,
                            rule="trapezoid") -> float:
    """Half the total initial charge, 0.5 * int int (F - f0) dv dx over [-R, R]."""
    _require_covers(vgrid, init.background.support, "background support")
    if xgrid is None:
        xgrid = Grid(init.radius, 1025)
    _require_covers(xgrid, init.radius, "perturbation")
    x = xgrid.nodes[:, None]
    v = vgrid.nodes[None, :]
    g0 = init.background(v) - init(x, v)
    rho0 = quadrature(g0, vgrid.delta, axis=1, rule=rule)
    return 0.5 * float(quadrature(rho0, xgrid.delta, rule=rule))


def deviation_support_qg(f, vnodes, background_values, threshold, running=0.0) -> float:
    """Largest |v| node where |F - f| exceeds threshold for some x.

    `running` is the historical value; the result is the max of the two, so
    repeated calls give the sup over all past times.
    """
    g = np.abs(np.asarray(background_values)[None, :] - np.asarray(f))
    active = np.any(g > threshold, axis=0)
    current = float(np.max(np.abs(vnodes[active]))) if np.any(active) else 0.0
    return max(float(running), current)


def density_support_q(f, vnodes, threshold, running=0.0) -> float:
    """Same as deviation_support_qg but for the support of f itself."""
    active = np.any(np.abs(np.asarray(f)) > threshold, axis=0)
    current = float(np.max(np.abs(vnodes[active]))) if np.any(active) else 0.0
    return max(float(running), current)
