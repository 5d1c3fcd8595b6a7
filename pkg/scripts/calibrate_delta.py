"""Pilot calibration of delta for the initial-configuration event E_delta_n.

Draws multinomial part sizes (the only input the event depends on) and prints
P(E_delta_n) for a grid of delta values; pick the largest delta whose share
clears 1 - epsilon with room to spare.
"""

import argparse

import numpy as np

from majlab.init_config import InitialLaw, check_events, stats_from_counts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--deltas", default="0.005,0.01,0.015,0.02,0.03,0.05")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    law = InitialLaw.uniform(args.k)
    rng = np.random.default_rng(args.seed)
    counts = rng.multinomial(args.n, law.floats, size=args.samples)
    stats = [stats_from_counts(c, law) for c in counts]
    print("delta,share,ci95")
    for d in (float(x) for x in args.deltas.split(",")):
        share = np.mean([check_events(s, args.n, law, d).e_delta_n for s in stats])
        ci = 1.96 * np.sqrt(share * (1 - share) / args.samples)
        print(f"{d},{share:.4f},{ci:.4f}")


if __name__ == "__main__":
    main()
