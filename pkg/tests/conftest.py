"""Session fixtures for the acceptance suite.

The baseline runs take a few minutes. Set VP1D_ACCEPTANCE_DIR to keep the
artifacts between sessions; a directory whose status file reads "ok" and
whose config echo matches is reused instead of recomputed.
"""

import os

import pytest

from vp1d.config import parse_config
from vp1d.run import run

STANDARD = """
[profile]
name = quartic_bump
epsilon = {eps}
radius = 1.0
[grid]
nx = {nx}
nv = {nv}
x_extent = {x_extent}
v_extent = {v_extent}
[time]
final_time_periods = 2
steps_per_period = {spp}
[solver]
method = {method}
"""

# the standard case extents (as resolved automatically for two periods), pinned so the
# coarse and fine runs of the convergence study share a domain
BASE = parse_config(STANDARD.format(eps=-0.1, nx=2048, nv=512, x_extent="auto", v_extent="auto",
                                    spp=200, method="both"))


def standard_config(eps=-0.1, nx=2048, nv=512, spp=200, method="both"):
    return parse_config(STANDARD.format(eps=eps, nx=nx, nv=nv, x_extent=repr(BASE.x_extent),
                                        v_extent=repr(BASE.v_extent), spp=spp, method=method))


def _cached_run(cfg, name, tmp_path_factory):
    root = os.environ.get("VP1D_ACCEPTANCE_DIR")
    directory = os.path.join(root, name) if root else str(tmp_path_factory.mktemp(name))
    cfg.directory = directory
    status = os.path.join(directory, "status")
    echo = os.path.join(directory, "config.echo")
    if cfg.method == "both":
        status = os.path.join(directory, "semilagrangian", "status")
        echo = os.path.join(directory, "semilagrangian", "config.echo")
    if root and os.path.exists(status) and open(status).read().strip() == "ok":
        with open(echo) as fh:
            previous = parse_config(fh.read())
        if (previous.nx, previous.nv, previous.steps, previous.x_extent, previous.epsilon) == \
                (cfg.nx, cfg.nv, cfg.steps, cfg.x_extent, cfg.epsilon):
            return directory
    run(cfg)
    return directory


@pytest.fixture(scope="session")
def baseline_dir(tmp_path_factory):
    """Standard case at 2048 x 512, 400 steps, both solvers."""
    return _cached_run(standard_config(), "baseline", tmp_path_factory)


@pytest.fixture(scope="session")
def coarse_dir(tmp_path_factory):
    """Standard case with dx, dv and dt doubled, semi-Lagrangian only."""
    cfg = standard_config(nx=1024, nv=256, spp=100, method="semilagrangian")
    return _cached_run(cfg, "coarse", tmp_path_factory)
