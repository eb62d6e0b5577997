"""Compare the two continuum collision quadratures as their resolution parameters are refined."""

import argparse

import numpy as np

from fputkin.kinetic import collision_operator
from fputkin.model import PROFILES, SimParams


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=64)
    parser.add_argument("--profile", default="bump", choices=sorted(PROFILES))
    parser.add_argument("--xi", type=float, nargs="+", default=[0.2, 0.45, 0.7])
    parser.add_argument("--taus", type=float, nargs="+", default=[200.0, 400.0, 800.0])
    parser.add_argument("--tubes", type=float, nargs="+", default=[None, 1e-2, 1e-3, 1e-4], help="level-set excision widths")
    args = parser.parse_args()

    p = SimParams(args.N)
    phi = PROFILES[args.profile]
    xi = np.array(args.xi)
    print("method,parameter," + ",".join(f"K({x:g})" for x in xi))
    for tau in args.taus:
        vals = collision_operator(phi, xi, "sinc_broadened", p, tau=tau).values
        print(f"sinc,{tau:g}," + ",".join(f"{v:.6f}" for v in vals))
        vals = collision_operator(phi, xi, "sinc_broadened", p, tau=tau, extrapolate=True).values
        print(f"sinc_extrapolated,{tau:g}," + ",".join(f"{v:.6f}" for v in vals))
    for tube in args.tubes:
        vals = collision_operator(phi, xi, "level_set", p, sing_tol=tube).values
        label = f"{1 / p.time_scale:.3g} (default)" if tube is None else f"{tube:g}"
        print(f"level_set,{label}," + ",".join(f"{v:.6f}" for v in vals))


if __name__ == "__main__":
    main()
