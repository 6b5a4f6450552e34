"""With no perturbation the background is an exact steady state.

f = F carries no charge, so the field law gives E = 0 and the velocity
shifts are zero; free streaming of an x-independent f is the identity.
The solver should reproduce this to round-off for as long as we like.
"""

import numpy as np

from _common import config_text, parser
from vp1d import parse_config
from vp1d.run import settings_for
from vp1d.solver import initial_state, step_semilagrangian


def main():
    args = parser(__doc__).parse_args()
    cfg = parse_config(config_text(eps=0.0, nx=args.nx, nv=args.nv))
    bg, init = cfg.case()
    settings = settings_for(cfg, "semilagrangian")
    state = initial_state(init, cfg.xgrid, cfg.vgrid, settings)
    F = bg(cfg.vgrid.nodes)[None, :]
    worst_E = worst_f = 0.0
    for _ in range(cfg.steps):
        state, _ = step_semilagrangian(state, cfg.time_step, bg, settings)
        worst_E = max(worst_E, float(np.max(np.abs(state.field.E))))
        worst_f = max(worst_f, float(np.max(np.abs(state.f - F))))
    print(f"{cfg.steps} steps to t = {state.t:.4f}")
    print(f"max |E|     = {worst_E:.3e}")
    print(f"max |f - F| = {worst_f:.3e}")


if __name__ == "__main__":
    main()
