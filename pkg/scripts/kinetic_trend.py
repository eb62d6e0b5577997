"""Rescaled Monte-Carlo spectral change against the collision operator for growing N."""

import argparse
import os

import numpy as np

from fputkin.kinetic import collision_operator, second_order_predictor
from fputkin.model import PROFILES, SimParams, spectrum_on_grid
from fputkin.simulator import ensemble_spectrum


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--samples", type=int, default=2000)
    parser.add_argument("--t-over-T-kin", type=float, default=0.01)
    parser.add_argument("--dist", default="phase", choices=["phase", "gaussian"])
    parser.add_argument("--profile", default="default", choices=sorted(PROFILES))
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args()

    print("N,T_kin,t,mc_vs_K,predictor_vs_K,mc_vs_predictor_in_stderr")
    for N in args.sizes:
        p = SimParams(N, dist=args.dist, seed=11)
        t = args.t_over_T_kin * p.T_kin
        K = collision_operator(PROFILES[args.profile], p.grid.points, "level_set", p, sing_tol=1e-4).values
        ens = ensemble_spectrum(args.profile, p, args.samples, [0.0, t], threads=args.threads)
        n = spectrum_on_grid(args.profile, p.grid)
        pred = second_order_predictor(args.profile, t, None, p, form="exact").values
        scale = np.max(np.abs(K))
        mc = np.max(np.abs((ens.mean[-1] - n) * p.T_kin / t - K)) / scale
        sk = np.max(np.abs(pred * p.T_kin / t - K)) / scale
        z = np.max(np.abs(ens.mean[-1] - n - pred) / np.maximum(ens.stderr[-1], 1e-300))
        print(f"{N},{p.T_kin:.4g},{t:.4g},{mc:.4f},{sk:.4f},{z:.2f}")


if __name__ == "__main__":
    main()
