"""Integrate one trajectory over the slow time window and report conservation drift."""

import argparse

import numpy as np

from fputkin.model import SimParams, sample_initial_data
from fputkin.simulator import conserved_quantities, evolve, max_stable_dt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=64)
    parser.add_argument("--gamma", type=float, default=0.6)
    parser.add_argument("--profile", default="default")
    parser.add_argument("--sample", type=int, default=0)
    parser.add_argument("--refine", type=int, nargs="+", default=[1, 2, 4, 8], help="divisors of the stable step")
    args = parser.parse_args()

    p = SimParams(args.N, gamma=args.gamma)
    b0 = sample_initial_data(args.profile, p, args.sample)
    T = p.time_scale
    base = max_stable_dt(p, float(np.max(np.abs(b0)) ** 2))
    print(f"N={args.N} gamma={args.gamma} T={T:.4g} stable dt={base:.4g}")
    print("divisor,dt,action_drift,energy_drift")
    for d in args.refine:
        traj = evolve(b0, T, base / d, p, np.linspace(0.0, T, 21))
        action, energy = conserved_quantities(traj.snapshots, p)
        a = np.max(np.abs(action - action[0])) / action[0]
        e = np.max(np.abs(energy - energy[0])) / abs(energy[0])
        print(f"{d},{base / d:.6g},{a:.3e},{e:.3e}")


if __name__ == "__main__":
    main()
