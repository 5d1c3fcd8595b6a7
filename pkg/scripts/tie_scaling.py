"""Round-1 tie-set size against n at fixed p, with the fitted exponent of n / p."""

import argparse
import math

import numpy as np

from majlab import harness, verifiers


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="2000,4000,8000,16000")
    ap.add_argument("--p", type=float, default=0.3)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()
    base = harness.ExperimentConfig(n=1000, p=args.p, k=args.k, n_trials=args.trials, max_rounds=1,
                                    master_seed=args.seed)
    ns = tuple(int(x) for x in args.ns.split(","))
    sweep = harness.run_sweep(harness.SweepConfig(base, "n", ns))
    print("n,mean_ties,sd_ties,max_ties,hard_bound,mean_over_sqrt_n_over_p")
    for n, res in sweep.results.items():
        t = np.array([r.ties_in(1) for r in res.records], dtype=float)
        print(f"{n},{t.mean():.2f},{t.std(ddof=1):.2f},{int(t.max())},{verifiers.residual_bound(n, args.p):.0f},"
              f"{t.mean() / math.sqrt(n / args.p):.4f}")
    v = verifiers.verify_tie_scaling({n: r.records for n, r in sweep.results.items()}, args.p)
    print(f"# exponent of n/p: {v.statistic:.4f} +/- {v.ci_halfwidth:.4f} ({v.status})")


if __name__ == "__main__":
    main()
