"""Command line entry point: vp1d run | verify | compare | theory."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import nullcontext

import numpy as np

from .config import load_config
from .errors import ConfigError, VP1DError
from .run import IncompatibleError, MissingArtifactError, compare, run, theory_summary, verify, write_report

log = logging.getLogger("vp1d")

THREADS_ENV = "VP1D_THREADS"


def _thread_limit():
    value = os.environ.get(THREADS_ENV)
    if not value:
        return nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        log.warning("%s set but threadpoolctl is not installed; ignoring", THREADS_ENV)
        return nullcontext()
    return threadpool_limits(limits=n)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        cfg.directory = args.output
    try:
        with _thread_limit():
            art = run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except VP1DError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {art.directory} ({cfg.steps} steps, {art.elapsed:.1f} s)")
    return 0


def _print_checks(checks):
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print("ALL CHECKS PASSED" if ok else "SOME CHECKS FAILED")
    return ok


def cmd_verify(args) -> int:
    try:
        with _thread_limit():
            checks = verify(args.directory)
    except (MissingArtifactError, OSError) as exc:
        print(f"cannot verify: {exc}", file=sys.stderr)
        return 1
    return 0 if _print_checks(checks) else 1


def cmd_compare(args) -> int:
    try:
        checks = compare(args.dir_a, args.dir_b)
    except (IncompatibleError, MissingArtifactError, OSError) as exc:
        print(f"cannot compare: {exc}", file=sys.stderr)
        return 1
    if args.report:
        write_report(args.report, checks)
    return 0 if _print_checks(checks) else 1


def cmd_theory(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    params, t, r = theory_summary(cfg, args.rows)
    print(f"E0: {params.e0:.12g}")
    print(f"omega: {params.omega:.12g}")
    print(f"period: {params.period:.12g}")
    print(f"final_time: {cfg.final_time:.12g}")
    print(f"x_extent: {cfg.x_extent:.12g}")
    print(f"v_extent: {cfg.v_extent:.12g}")
    print("# a priori R(t) with Q_g <= v_extent and ||E|| <= 2|E0|")
    print("t,R_t,E_exterior")
    for ti, ri in zip(t, r):
        print(f"{ti:.6f},{ri:.6f},{params.e0 * np.cos(params.omega * ti):.6e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vp1d", description="1D-1V Vlasov-Poisson with a fixed ion background")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a configuration and write artifacts")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="override the output directory")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="check an artifact directory against the exterior theory")
    v.add_argument("directory")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compare", help="relative L2 differences of rho and E between two runs")
    c.add_argument("dir_a")
    c.add_argument("dir_b")
    c.add_argument("--report", help="directory to write report.txt and checks.csv into")
    c.set_defaults(func=cmd_compare)

    t = sub.add_parser("theory", help="print E0, omega and an R(t) table without simulating")
    t.add_argument("config")
    t.add_argument("--rows", type=int, default=9)
    t.set_defaults(func=cmd_theory)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
