"""Round-1 extinction of non-leading states as n grows.

For each n, runs the dynamics for one round and reports the share of trials in
which every non-leader state is extinct, next to the Gaussian prediction
exp(-n * P(vertex prefers a non-leader)).
"""

import argparse
import math

import numpy as np
from scipy import stats as sps

from majlab import harness, verifiers
from majlab.init_config import InitialLaw


def predicted_extinction(n, p, law):
    lam = law.floats
    top = int(np.argmax(lam))
    # prob. that the runner-up out-counts (or ties with) the leader in a vertex's neighbourhood
    second = sorted(lam)[-2]
    mean = (lam[top] - second) * n * p
    sd = math.sqrt(p * (1 - p) * (lam[top] + second) * n)
    per_vertex = sps.norm.cdf(-mean / sd)
    return math.exp(-n * per_vertex), n * per_vertex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="5000,10000,15000,20000")
    ap.add_argument("--p", type=float, default=0.3)
    ap.add_argument("--lam", default="2/5,7/20,1/4")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    lam = tuple(args.lam.split(","))
    law = InitialLaw(lam)
    print("n,trials,extinct_share,ci95,mean_survivors,predicted_share,predicted_survivors")
    for n in (int(x) for x in args.ns.split(",")):
        cfg = harness.ExperimentConfig(n=n, p=args.p, k=len(lam), lam=lam, n_trials=args.trials,
                                       max_rounds=1, master_seed=args.seed)
        recs = harness.run_experiment(cfg).records
        v = verifiers.verify_round1_elimination(recs, law.leaders)
        others = [j for j in range(1, law.k + 1) if j not in law.leaders]
        surv = np.mean([sum(r.parts_after(1)[j - 1] for j in others) for r in recs])
        share, mu = predicted_extinction(n, args.p, law)
        print(f"{n},{len(recs)},{v.statistic:.3f},{v.ci_halfwidth:.3f},{surv:.3f},{share:.3f},{mu:.3f}")


if __name__ == "__main__":
    main()
