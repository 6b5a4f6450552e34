"""Shared configuration text for the demos."""

import argparse

STANDARD = """
[profile]
name = quartic_bump
epsilon = {eps}
[grid]
nx = {nx}
nv = {nv}
[time]
final_time_periods = {periods}
steps_per_period = {spp}
[solver]
method = {method}
[output]
directory = {out}
"""


def config_text(eps=-0.1, nx=512, nv=128, periods=2, spp=100, method="semilagrangian", out="demo_run"):
    return STANDARD.format(eps=eps, nx=nx, nv=nv, periods=periods, spp=spp, method=method, out=out)


def parser(doc, nx=512, nv=128):
    p = argparse.ArgumentParser(description=doc.strip().splitlines()[0])
    p.add_argument("--nx", type=int, default=nx)
    p.add_argument("--nv", type=int, default=nv)
    p.add_argument("--out", default=None, help="artifact directory (default: a temporary one)")
    return p
