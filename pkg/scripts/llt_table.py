"""Exact neighbour-profile probabilities against the Gaussian local-limit form.

Prints the worst relative error for both normalisations over a window of
deviations, for two and three leading parts.
"""

import argparse
import math

from majlab.oracle import llt_compare


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--csv", action="store_true", help="dump the full k0 = 2 table")
    args = ap.parse_args()
    cases = [
        (100_000, 10_000, (50_000, 50_000), 200),
        (1_000_000, 100_000, (500_000, 500_000), 0),
        (30_000, 6_000, (10_000, 10_000, 10_000), 20),
        (90_000, 9_000, (40_000, 30_000, 20_000), 10),
    ]
    print("n_v_star,n_of_v,k0,window,rel_err_at_0,max_rel_err_published,max_rel_err_standard,closer")
    for n_v_star, n_of_v, parts, window in cases:
        t = llt_compare(n_v_star, n_of_v, parts, window)
        zero = t.row_at((0,) * (len(parts) - 1))
        print(f"{n_v_star},{n_of_v},{len(parts)},{window},{zero.rel_err:.3g},{t.max_rel_err():.3g},"
              f"{t.max_rel_err(standard=True):.3g},{t.normalization}")
    if args.csv:
        print(llt_compare(100_000, 10_000, (50_000, 50_000), int(2 * math.sqrt(10_000))).to_csv(), end="")


if __name__ == "__main__":
    main()
