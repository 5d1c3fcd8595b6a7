"""Command-line entry point: ``majlab simulate|sweep|verify|oracle``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, oracle, verifiers
from .dynamics import majority_step
from .init_config import stats_from_counts
from .verifiers import ClaimId


def _overrides(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise SystemExit(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v
    return out


def _load(args):
    over = _overrides(args.set)
    if getattr(args, "fix_graph", False):
        over["resample_graph_per_trial"] = "false"
    if getattr(args, "fix_config", False):
        over["resample_config_per_trial"] = "false"
    if args.threads is not None:
        over["threads"] = args.threads
    return harness.load_config(args.config, over)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    result = harness.run_experiment(cfg)
    path = harness.write_experiment(result, args.out)
    print(f"wrote {len(result.records)} trials to {path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = [v for v in args.values.split(",") if v.strip()]
    conv = int if args.axis == "n" else float
    sweep = harness.SweepConfig(cfg, args.axis, tuple(conv(v) for v in values))
    result = harness.run_sweep(sweep)
    harness.write_sweep(result, args.out)
    print(json.dumps(result.fits, sort_keys=True))
    return 0


# --- verify ---------------------------------------------------------------------


def _na(claim, why):
    return verifiers.ClaimVerdict(claim, "not-applicable", float("nan"), float("nan"), 0, float("nan"), why)


def _degree_gap_from_seeds(cfg, records):
    verdicts = []
    for r in records:
        g, s0, ts = harness.build_trial(cfg, r.trial_id)
        out = majority_step(g, s0, ts, 1)
        parts, tie = verifiers.round1_partition(out)
        verdicts.append(verifiers.verify_degree_gap(g, parts, verifiers.DEGREE_GAP_DELTA, cfg.p, residual=tie))
    return verifiers.aggregate_degree_gap(verdicts)


def _verify_single(cfg, records, claim):
    law = cfg.law
    if claim is ClaimId.UNANIMITY_3:
        return verifiers.verify_unanimity(records)
    if claim is ClaimId.ROUND1_ELIM:
        return verifiers.verify_round1_elimination(records, law.leaders)
    if claim is ClaimId.STRONG_GAP:
        stats = [stats_from_counts(r.initial_counts, law) for r in records]
        return verifiers.verify_strong_gap(records, stats, law, verifiers.CALIBRATED_DELTA, cfg.p)
    if claim is ClaimId.ANTI_CONC:
        return verifiers.anti_concentration_from_counts(
            [r.initial_counts for r in records], law, verifiers.CALIBRATED_DELTA, 0.1
        )
    if claim is ClaimId.DEGREE_GAP:
        return _degree_gap_from_seeds(cfg, records)
    if claim is ClaimId.WINNER_IS_LEADER:
        return verifiers.verify_winner_is_leader(records)
    if claim is ClaimId.CLEANUP_R2R3:
        return verifiers.verify_cleanup(records)
    return _na(claim, "needs a sweep directory")


def _verify_sweep(root: Path, claim):
    meta = json.loads((root / "sweep.json").read_text())
    axis = meta["axis"]
    runs = {}
    for v in meta["values"]:
        d = root / f"{axis}={v}"
        runs[v] = (harness.load_config(d / "config.txt"), harness.read_trials_csv(d / "trials.csv"))
    if claim is ClaimId.TIE_SET_SCALING:
        if axis != "n":
            return _na(claim, "tie scaling is fitted over n")
        p = next(iter(runs.values()))[0].p
        return verifiers.verify_tie_scaling({v: recs for v, (_, recs) in runs.items()}, p)
    if claim is ClaimId.VARIANCE_BOUND:
        cfg0 = next(iter(runs.values()))[0]
        if axis != "n" or cfg0.resample_config_per_trial:
            return _na(claim, "needs an n sweep with a fixed configuration")
        return verifiers.verify_variance({v: recs for v, (_, recs) in runs.items()})
    return _na(claim, "evaluated on single experiments, not sweeps")


def cmd_verify(args) -> int:
    root = Path(args.records)
    if args.claims == "all":
        claims = list(ClaimId)
    else:
        try:
            claims = [ClaimId(c.strip()) for c in args.claims.split(",") if c.strip()]
        except ValueError as e:
            raise SystemExit(str(e))
    if (root / "sweep.json").exists():
        verdicts = [_verify_sweep(root, c) for c in claims]
    else:
        cfg = harness.load_config(root / "config.txt")
        records = harness.read_trials_csv(root / "trials.csv")
        verdicts = [_verify_single(cfg, records, c) for c in claims]
    payload = [v.to_json() for v in verdicts]
    text = json.dumps(payload, indent=2) + "\n"
    if args.json:
        Path(args.json).write_text(text)
    for v in verdicts:
        print(f"{v.claim_id.value:18s} {v.status:15s} stat={v.statistic:.4g} thr={v.threshold:.4g} {v.notes}")
    return 0 if all(v.acceptable for v in verdicts) else 1


# --- oracle ---------------------------------------------------------------------


def _params(pairs):
    out = {}
    for item in pairs:
        k, _, v = item.partition("=")
        if not _:
            raise SystemExit(f"parameter {item!r} is not key=value")
        out[k] = v
    return out


def _ints(s):
    return tuple(int(x) for x in s.split(","))


def cmd_oracle(args) -> int:
    prm = _params(args.params)
    try:
        if args.kind == "llt":
            table = oracle.llt_compare(
                int(prm["n_v_star"]), int(prm["n_of_v"]), _ints(prm["parts"]), int(prm.get("window", 0))
            )
            sys.stdout.write(table.to_csv())
            print(
                f"normalisation: {table.normalization}; max rel err published={table.max_rel_err():.4g} "
                f"standard={table.max_rel_err(standard=True):.4g}",
                file=sys.stderr,
            )
        elif args.kind == "profile":
            prof = oracle.NeighborProfile(_ints(prm["s"]), int(prm["n_of_v"]), _ints(prm["parts"]))
            print(oracle.profile_prob_exact(prof))
        else:
            print(repr(oracle.tie_prob_exact(int(prm["n_i"]), int(prm["n_j"]), float(prm["p"]))))
    except KeyError as e:
        raise SystemExit(f"missing parameter {e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="majlab", description="Synchronous majority dynamics on G(n, p).")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="flat key = value file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", required=True, help="output directory")

    sim = sub.add_parser("simulate", help="run one experiment")
    common(sim)
    mode = sim.add_mutually_exclusive_group()
    mode.add_argument("--fix-graph", action="store_true", help="one graph, fresh initial state per trial")
    mode.add_argument("--fix-config", action="store_true", help="one initial state, fresh graph per trial")
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="run one experiment per axis value")
    common(sw)
    sw.add_argument("--axis", choices=("n", "p"), required=True)
    sw.add_argument("--values", required=True, help="comma-separated, ascending")
    sw.add_argument("--fix-config", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", help="evaluate claims on stored records")
    ver.add_argument("--records", required=True)
    ver.add_argument("--claims", default="all")
    ver.add_argument("--json", default=None)
    ver.set_defaults(func=cmd_verify)

    orc = sub.add_parser("oracle", help="exact probabilities and approximations")
    orc.add_argument("kind", choices=("llt", "profile", "tie"))
    orc.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    orc.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, MemoryError) as e:
        print(f"majlab: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
