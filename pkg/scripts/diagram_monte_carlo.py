"""Couple-kernel sums against Monte-Carlo moments of the explicit iterates."""

import argparse

import numpy as np

from fputkin.diagrams.couples import iter_couples
from fputkin.diagrams.iterates import iterates, pair_moments
from fputkin.diagrams.kernel import kernel_sums
from fputkin.model import SimParams, sample_noise


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=8)
    parser.add_argument("--samples", type=int, default=5000)
    parser.add_argument("--t", type=float, default=0.5, help="slow time in [0, 1]")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    p = SimParams(args.N, seed=args.seed)
    eta = np.stack([sample_noise(args.N - 1, p.seed, m, "gaussian") for m in range(args.samples)])
    moments = pair_moments(iterates(eta, p, "default", args.t, None))
    couples = [c for n in range(3) for c in iter_couples(n)]
    print("j,pair,kernel_re,kernel_im,mc_re,mc_im,z_re,z_im")
    for j in range(1, args.N):
        sums = kernel_sums(couples, args.t, args.t, j / args.N, None, p, "default")
        for key, (mean, se) in moments.items():
            k, m, s = sums.get(key, 0j), mean[j - 1], se[j - 1]
            z_re = abs(k.real - m.real) / s.real if s.real else 0.0
            z_im = abs(k.imag - m.imag) / s.imag if s.imag else 0.0
            print(f"{j},{key[0]}{key[1]},{k.real:.6g},{k.imag:.6g},{m.real:.6g},{m.imag:.6g},{z_re:.2f},{z_im:.2f}")


if __name__ == "__main__":
    main()
