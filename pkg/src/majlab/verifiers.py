"""Turn trial populations into pass/fail verdicts for the desk-checkable claims.

Thresholds are finite-size stand-ins for "asymptotically almost surely"; each
is a module constant and can be overridden per call.  A verdict whose
premise fails on the data is ``not-applicable``, never ``fail``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sps

from .dynamics import StateVector, StepOutcome, TrialRecord
from .graph import Graph, VertexSubset
from .init_config import InitialLaw, PartitionStats, check_events, sample_initial, stats_from_counts
from .rng import split_seed

Z95 = 1.959963984540054

UNANIMITY_FLOOR = 0.95
UNANIMITY_MAX_ROUND = 3
ROUND1_FLOOR = 0.95
TIE_SLOPE_WINDOW = (0.35, 0.65)
STRONG_GAP_FLOOR = 0.90
VARIANCE_GROWTH = 2.0
VARIANCE_MIN_TRIALS = 30
CLEANUP_FRACTION = 0.99
CLEANUP_FLOOR = 0.95
WINNER_FLOOR = 0.85
DEGREE_GAP_FLOOR = 0.95
# Pilot-calibrated: P(E_delta_n) ~ 0.96 for k = 3 uniform (scripts/calibrate_delta.py).
CALIBRATED_DELTA = 0.005
# Gap constant b_i - b_{i+1} >= delta * n * sqrt(p) for the post-round-1 degree-gap check.
DEGREE_GAP_DELTA = 0.05


class ClaimId(str, enum.Enum):
    UNANIMITY_3 = "UNANIMITY_3"
    ROUND1_ELIM = "ROUND1_ELIM"
    TIE_SET_SCALING = "TIE_SET_SCALING"
    STRONG_GAP = "STRONG_GAP"
    VARIANCE_BOUND = "VARIANCE_BOUND"
    ANTI_CONC = "ANTI_CONC"
    DEGREE_GAP = "DEGREE_GAP"
    WINNER_IS_LEADER = "WINNER_IS_LEADER"
    CLEANUP_R2R3 = "CLEANUP_R2R3"


@dataclass
class ClaimVerdict:
    claim_id: ClaimId
    status: str  # "pass", "fail", "not-applicable", "indeterminate"
    statistic: float
    threshold: float
    n_trials: int
    ci_halfwidth: float
    notes: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def acceptable(self) -> bool:
        return self.status in ("pass", "not-applicable")

    def to_json(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            return x

        return {
            "claim_id": self.claim_id.value,
            "pass": self.passed,
            "statistic": clean(float(self.statistic)),
            "threshold": clean(float(self.threshold)),
            "n_trials": int(self.n_trials),
            "ci_halfwidth": clean(float(self.ci_halfwidth)),
            "notes": self.notes,
            "status": self.status,
        }


def proportion_ci(stat: float, n: int) -> float:
    if n <= 0:
        return math.nan
    return Z95 * math.sqrt(max(stat * (1 - stat), 0.0) / n)


def _verdict(claim, ok, stat, thr, n, ci, notes="", **extra):
    return ClaimVerdict(claim, "pass" if ok else "fail", float(stat), float(thr), n, ci, notes, extra)


def _check_records(records: Sequence[TrialRecord]):
    if not records:
        raise ValueError("no trial records given")
    first = records[0]
    for r in records:
        if (r.n, r.k) != (first.n, first.k) or (r.p is not None and first.p is not None and r.p != first.p):
            raise ValueError("records must share n, p and k")


# --- concentration inequalities and event predicates -------------------------


def chernoff_binomial_tail(n: int, q: float, delta: float) -> float:
    """Upper bound ``2 exp(-delta^2 n q / 3)`` on ``P(|X - nq| >= delta nq)``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return 2.0 * math.exp(-(delta**2) * n * q / 3.0)


def chernoff_hyper_tail(lam: float, s: int, N: int) -> float:
    """Serfling bound ``2 exp(-2 lam^2 / (1 - f_s))`` with ``f_s = (s - 1) / N``."""
    f = (s - 1) / N
    return 2.0 * math.exp(-2.0 * lam**2 / (1.0 - f))


def residual_bound(n: int, p: float) -> float:
    """``(ln n)^2 sqrt(n / p)``, the tie-set size bound."""
    return math.log(n) ** 2 * math.sqrt(n / p)


def degree_concentration_rate(g: Graph, s0: StateVector, p: float) -> float:
    """Fraction of vertices with ``|n_i(v) - n_i p| <= ln n sqrt(n p)`` for every state."""
    counts = g.label_counts(s0.states.astype(np.int64) - 1, s0.k)
    parts = s0.counts()
    bound = math.log(g.n) * math.sqrt(g.n * p)
    return float(np.mean(np.all(np.abs(counts - parts[None, :] * p) <= bound, axis=1)))


def hypergeometric_concentration_rate(g: Graph, s0: StateVector, law: InitialLaw) -> float:
    """Fraction of vertices with ``|n_i(v) - n*(v) n_i / n*| < ln n sqrt(n*(v))`` for leaders."""
    leaders = np.array(law.leaders) - 1
    counts = g.label_counts(s0.states.astype(np.int64) - 1, s0.k)[:, leaders]
    parts = s0.counts()[leaders]
    n_star = parts.sum()
    nsv = counts.sum(axis=1)
    expected = nsv[:, None] * parts[None, :] / n_star
    bound = math.log(g.n) * np.sqrt(nsv)
    return float(np.mean(np.all(np.abs(counts - expected) < bound[:, None], axis=1)))


# --- claim verifiers ----------------------------------------------------------


def verify_unanimity(records: Sequence[TrialRecord], floor: float = UNANIMITY_FLOOR) -> ClaimVerdict:
    """Share of trials that become unanimous in round 1, 2 or 3."""
    _check_records(records)
    hits = [1 <= r.rounds_to_unanimity <= UNANIMITY_MAX_ROUND for r in records]
    stat = float(np.mean(hits))
    return _verdict(ClaimId.UNANIMITY_3, stat >= floor, stat, floor, len(records), proportion_ci(stat, len(records)))


def verify_round1_elimination(
    records: Sequence[TrialRecord], m0: Iterable[int], floor: float = ROUND1_FLOOR
) -> ClaimVerdict:
    _check_records(records)
    m0 = set(m0)
    k = records[0].k
    others = [j for j in range(1, k + 1) if j not in m0]
    if not others:
        return _verdict(ClaimId.ROUND1_ELIM, True, 1.0, floor, len(records), 0.0, "every state is a leader")
    ok = []
    for r in records:
        parts = r.parts_after(1)
        ok.append(parts is not None and all(parts[j - 1] == 0 for j in others))
    stat = float(np.mean(ok))
    return _verdict(ClaimId.ROUND1_ELIM, stat >= floor, stat, floor, len(records), proportion_ci(stat, len(records)))


def verify_tie_scaling(
    sweep: Mapping[int, Sequence[TrialRecord]], p: float, window: tuple = TIE_SLOPE_WINDOW
) -> ClaimVerdict:
    """Exponent ``b`` in ``E|T_1| ~ (n / p)^b`` by least squares on logs, plus the hard bound.

    A tie set of order ``sqrt(n / p)`` gives ``b = 1/2``.
    """
    if len(sweep) < 3:
        raise ValueError("tie scaling needs at least three values of n")
    ns = sorted(sweep)
    means, within, total = [], 0, 0
    for n in ns:
        ties = np.array([r.ties_in(1) for r in sweep[n]], dtype=float)
        means.append(ties.mean())
        within += int(np.sum(ties <= residual_bound(n, p)))
        total += ties.size
    bound_ok = within == total
    extra = {"means": dict(zip(ns, means)), "hard_bound_fraction": within / total}
    if min(means) <= 0:
        return ClaimVerdict(
            ClaimId.TIE_SET_SCALING, "fail", math.nan, window[0], total, math.nan,
            "mean tie count is zero for some n; slope undefined", extra,
        )
    x = np.log(np.array(ns, dtype=float) / p)
    fit = sps.linregress(x, np.log(means))
    ok = window[0] <= fit.slope <= window[1] and bound_ok
    notes = f"slope window [{window[0]}, {window[1]}]; hard bound held in {within}/{total} trials"
    return _verdict(
        ClaimId.TIE_SET_SCALING, ok, fit.slope, window[0], total, Z95 * fit.stderr, notes,
        window=list(window), **extra,
    )


def _sorted_leaders(st: PartitionStats):
    order = sorted(range(st.k0), key=lambda j: (-st.c[j], st.leaders[j]))
    return [st.leaders[j] for j in order], [st.c[j] for j in order]


def verify_strong_gap(
    records: Sequence[TrialRecord],
    stats: Sequence[PartitionStats],
    law: InitialLaw,
    delta: float = CALIBRATED_DELTA,
    p: float | None = None,
    floor: float = STRONG_GAP_FLOOR,
) -> ClaimVerdict:
    """On trials in ``E_delta_n``, check that round-1 strong counts follow the ``c`` order.

    ``Lambda_hat`` is the median over qualifying trials of
    ``min_i (X_i - X_{i+1}) / (n sqrt(p) (c_i - c_{i+1}))``.
    """
    _check_records(records)
    if len(records) != len(stats):
        raise ValueError("need one PartitionStats per record")
    p = p if p is not None else records[0].p
    if p is None:
        raise ValueError("edge probability unknown")
    if stats[0].k0 < 2:
        return _verdict(ClaimId.STRONG_GAP, True, 1.0, floor, len(records), 0.0, "single leader: no pairs")
    ordered, lams = [], []
    for r, st in zip(records, stats):
        if not check_events(st, r.n, law, delta).e_delta_n:
            continue
        states, cs = _sorted_leaders(st)
        xs = [r.strong_counts_round1[j - 1] for j in states]
        ordered.append(all(xs[j] > xs[j + 1] for j in range(len(xs) - 1)))
        lams.append(min(
            (xs[j] - xs[j + 1]) / (r.n * math.sqrt(p) * (cs[j] - cs[j + 1])) for j in range(len(xs) - 1)
        ))
    if not ordered:
        return ClaimVerdict(ClaimId.STRONG_GAP, "indeterminate", math.nan, floor, 0, math.nan,
                            "no trial satisfied E_delta_n")
    stat = float(np.mean(ordered))
    lam_hat = float(np.median(lams))
    ok = stat >= floor and lam_hat > 0
    return _verdict(
        ClaimId.STRONG_GAP, ok, stat, floor, len(ordered), proportion_ci(stat, len(ordered)),
        f"Lambda_hat={lam_hat:.4g}; {len(ordered)}/{len(records)} trials in E_delta_n (delta={delta})",
        lambda_hat=lam_hat, qualifying=len(ordered),
    )


def verify_variance(
    sweep: Mapping[int, Sequence[TrialRecord]], growth: float = VARIANCE_GROWTH, state: int = 1
) -> ClaimVerdict:
    """Var(X_state)/n^{3/2} at the largest n must not exceed ``growth`` times its value at the smallest."""
    if len(sweep) < 2:
        raise ValueError("variance check needs at least two values of n")
    ns = sorted(sweep)
    ratios = {}
    for n in ns:
        recs = sweep[n]
        if len(recs) < VARIANCE_MIN_TRIALS:
            raise ValueError(f"need at least {VARIANCE_MIN_TRIALS} trials per n, got {len(recs)} at n={n}")
        if len({r.initial_counts for r in recs}) != 1:
            raise ValueError(f"initial configuration varies across trials at n={n}")
        x = np.array([r.strong_counts_round1[state - 1] for r in recs], dtype=float)
        ratios[n] = float(np.var(x, ddof=1)) / n**1.5
    lo, hi = ratios[ns[0]], ratios[ns[-1]]
    ok = hi <= growth * lo
    stat = max(ratios.values())
    m = len(sweep[ns[-1]])
    ci = Z95 * hi * math.sqrt(2.0 / (m - 1))
    return _verdict(
        ClaimId.VARIANCE_BOUND, ok, stat, growth * lo, sum(len(v) for v in sweep.values()), ci,
        f"ratio at n={ns[-1]} is {hi:.4g}, at n={ns[0]} is {lo:.4g}", ratios=ratios,
    )


def anti_concentration_from_counts(
    counts: Iterable[Sequence[int]], law: InitialLaw, delta: float, epsilon: float
) -> ClaimVerdict:
    """Share of initial configurations (given by their part sizes) lying in ``E_delta_n``."""
    counts = [tuple(c) for c in counts]
    if not counts:
        raise ValueError("no configurations given")
    hits = sum(check_events(stats_from_counts(c, law), sum(c), law, delta).e_delta_n for c in counts)
    stat = hits / len(counts)
    notes = f"delta={delta}"
    if len(law.leaders) < 2:
        notes += "; single leader, gap condition vacuous"
    return _verdict(ClaimId.ANTI_CONC, stat >= 1 - epsilon, stat, 1 - epsilon, len(counts),
                    proportion_ci(stat, len(counts)), notes)


def verify_anti_concentration(
    n: int, law: InitialLaw, delta: float, epsilon: float, n_trials: int, seed: int
) -> ClaimVerdict:
    """Sample initial configurations only and measure P(E_delta_n)."""
    counts = (sample_initial(n, law, split_seed(seed, i)).counts() for i in range(n_trials))
    return anti_concentration_from_counts(counts, law, delta, epsilon)


def round1_partition(outcome: StepOutcome, states: Sequence[int] | None = None):
    """Strong-sense parts of a round-1 outcome, largest first, and the tie set."""
    nxt = outcome.next.states
    tie = outcome.tie_set.mask
    states = states or range(1, outcome.next.k + 1)
    parts = [VertexSubset.from_mask((nxt == j) & ~tie) for j in states]
    parts.sort(key=len, reverse=True)
    return parts, outcome.tie_set


def verify_degree_gap(
    g: Graph,
    partition: Sequence[VertexSubset],
    delta: float,
    p: float,
    omega: float | None = None,
    residual: VertexSubset | None = None,
) -> ClaimVerdict:
    """Count vertices whose consecutive part-degree gaps fall to ``(delta/4) n p^{3/2}`` or below."""
    n = g.n
    sizes = [len(s) for s in partition]
    if any(a < b for a, b in zip(sizes, sizes[1:])):
        raise ValueError("partition parts must be ordered by size, largest first")
    omega = omega if omega is not None else n ** (1 / 3) * p
    limit = n * p / math.sqrt(omega)
    if len(partition) < 2:
        return _verdict(ClaimId.DEGREE_GAP, True, 0.0, limit, 1, 0.0, "single part: no pairs")
    labels = np.full(n, len(partition), dtype=np.int64)
    for i, s in enumerate(partition):
        if np.any(labels[s.mask] != len(partition)):
            raise ValueError("parts must be pairwise disjoint")
        labels[s.mask] = i
    if residual is not None and np.any(labels[residual.mask] != len(partition)):
        raise ValueError("residual part overlaps the other parts")

    need = delta * n * math.sqrt(p)
    gaps = [a - b for a, b in zip(sizes, sizes[1:])]
    premise = [g_ >= need for g_ in gaps]
    if residual is not None and len(residual) > residual_bound(n, p):
        premise.append(False)
    if not all(premise):
        return ClaimVerdict(
            ClaimId.DEGREE_GAP, "not-applicable", math.nan, limit, 1, math.nan,
            f"premise violated: part-size gaps {gaps} vs required {need:.1f}",
            {"part_sizes": sizes},
        )
    counts = g.label_counts(labels, len(partition) + 1)
    diffs = counts[:, :-2] - counts[:, 1:-1]
    bad = np.any(diffs <= delta / 4 * n * p**1.5, axis=1)
    violators = int(bad.sum())
    return _verdict(ClaimId.DEGREE_GAP, violators <= limit, violators, limit, 1, 0.0,
                    f"{violators} violators, limit n p / sqrt(omega) = {limit:.1f}", part_sizes=sizes)


def aggregate_degree_gap(verdicts: Sequence[ClaimVerdict], floor: float = DEGREE_GAP_FLOOR) -> ClaimVerdict:
    """Fraction of applicable per-trial degree-gap verdicts that pass."""
    applicable = [v for v in verdicts if v.status != "not-applicable"]
    skipped = len(verdicts) - len(applicable)
    if not applicable:
        return ClaimVerdict(ClaimId.DEGREE_GAP, "not-applicable", math.nan, floor, 0, math.nan,
                            f"premise failed in all {skipped} trials")
    stat = float(np.mean([v.passed for v in applicable]))
    return _verdict(ClaimId.DEGREE_GAP, stat >= floor, stat, floor, len(applicable),
                    proportion_ci(stat, len(applicable)),
                    f"{skipped} of {len(verdicts)} trials not applicable (premise)", not_applicable=skipped)


def verify_cleanup(
    records: Sequence[TrialRecord], fraction: float = CLEANUP_FRACTION, floor: float = CLEANUP_FLOOR
) -> ClaimVerdict:
    """Round 2 leaves at most a ``1 - fraction`` share off the winner; round 3 is unanimous."""
    _check_records(records)
    near, full = [], []
    for r in records:
        r2, r3 = r.parts_after(2), r.parts_after(3)
        near.append(r.winner > 0 and r2 is not None and r2[r.winner - 1] >= fraction * r.n)
        full.append(r3 is not None and max(r3) == r.n)
    s1, s2 = float(np.mean(near)), float(np.mean(full))
    m = len(records)
    return _verdict(
        ClaimId.CLEANUP_R2R3, s1 >= floor and s2 >= floor, min(s1, s2), floor, m,
        max(proportion_ci(s1, m), proportion_ci(s2, m)),
        f"round-2 near-unanimity {s1:.3f}, round-3 unanimity {s2:.3f}",
        round2_near=s1, round3_unanimous=s2,
    )


def verify_winner_is_leader(records: Sequence[TrialRecord], floor: float = WINNER_FLOOR) -> ClaimVerdict:
    """Share of trials won by the initially largest state."""
    _check_records(records)
    hits = [r.winner > 0 and r.initial_counts[r.winner - 1] == max(r.initial_counts) for r in records]
    stat = float(np.mean(hits))
    return _verdict(ClaimId.WINNER_IS_LEADER, stat >= floor, stat, floor, len(records),
                    proportion_ci(stat, len(records)))


def degree_gap_probe(delta: float = DEGREE_GAP_DELTA, omega: float | None = None):
    """Per-trial hook for ``run_experiment``: degree-gap verdict on the round-1 partition."""

    def probe(g: Graph, s0: StateVector, t: int, outcome: StepOutcome) -> ClaimVerdict:
        parts, tie = round1_partition(outcome)
        return verify_degree_gap(g, parts, delta, g.p_nominal, omega, residual=tie)

    return probe
