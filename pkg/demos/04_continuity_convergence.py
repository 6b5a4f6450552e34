"""Local charge conservation converges at second order.

The residual d(rho)/dt + d(j)/dx, with both derivatives taken by centred
differences on the stored full-step fields, is not zero for the discrete
solution. Halving dx, dv and dt together should cut its RMS about
fourfold. Both runs share the domain of the finest one.
"""

import tempfile

from _common import config_text, parser
from vp1d import parse_config, run
from vp1d.run import continuity_convergence


def main():
    args = parser(__doc__, nx=1024, nv=256).parse_args()
    root = args.out or tempfile.mkdtemp(prefix="vp1d_continuity_")
    fine_cfg = parse_config(config_text(nx=args.nx, nv=args.nv, spp=200, out=f"{root}/fine"))
    extents = f"x_extent = {fine_cfg.x_extent!r}\nv_extent = {fine_cfg.v_extent!r}\n"
    coarse_text = config_text(nx=args.nx // 2, nv=args.nv // 2, spp=100, out=f"{root}/coarse")
    coarse_cfg = parse_config(coarse_text.replace("[time]", extents + "[time]"))
    for cfg in (coarse_cfg, fine_cfg):
        run(cfg)
        print(f"{cfg.nx} x {cfg.nv}, {cfg.steps} steps done")
    coarse, fine, ratio = continuity_convergence(coarse_cfg.directory, fine_cfg.directory)
    print(f"RMS residual coarse {coarse:.4e}, fine {fine:.4e}, ratio {ratio:.2f}")


if __name__ == "__main__":
    main()
