"""Initial configurations: the law over states, part statistics, and the
high-probability events the analysis conditions on.

All logarithms are natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dynamics import StateVector


def _as_fraction(x) -> Fraction | float:
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return float(x)


@dataclass(frozen=True)
class InitialLaw:
    """Probabilities ``lambda_1..lambda_k``, each positive, summing to one.

    Entries given as strings ("1/3") or ``Fraction`` are kept exact, which makes
    the leader set independent of float rounding.
    """

    probs: tuple

    def __post_init__(self):
        probs = tuple(_as_fraction(x) for x in self.probs)
        if len(probs) < 1:
            raise ValueError("law needs at least one state")
        if any(x <= 0 for x in probs):
            raise ValueError("every lambda_i must be strictly positive")
        total = sum(probs)
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"lambda sums to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"lambda sums to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, k: int) -> "InitialLaw":
        return cls(tuple(Fraction(1, k) for _ in range(k)))

    @property
    def k(self) -> int:
        return len(self.probs)

    @property
    def floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.probs])

    @property
    def leaders(self) -> tuple:
        """``M_0``: 1-based states attaining the largest probability (exact comparison)."""
        top = max(self.probs)
        return tuple(i + 1 for i, x in enumerate(self.probs) if x == top)

    @property
    def lambda_max(self) -> float:
        return float(max(self.probs))

    def as_strings(self) -> list:
        return [str(x) for x in self.probs]


@dataclass(frozen=True)
class PartitionStats:
    counts: tuple
    leaders: tuple
    n_star: int
    c: tuple  # c_i for i in leaders, same order as ``leaders``
    lambda_max: float

    @property
    def k0(self) -> int:
        return len(self.leaders)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def leaders_by_c(self) -> list:
        """Leader states sorted by ``c`` descending (ties broken by state id)."""
        order = sorted(range(self.k0), key=lambda j: (-self.c[j], self.leaders[j]))
        return [self.leaders[j] for j in order]


@dataclass(frozen=True)
class EventVerdicts:
    e0: bool
    p0: bool
    e_delta_n: bool
    delta: float
    event_1: bool
    event_2: bool
    n_star_v_rate: float | None = None


def sample_initial(n: int, law: InitialLaw, seed: int) -> StateVector:
    """Each vertex independently takes state ``i`` with probability ``lambda_i``."""
    if n < 1:
        raise ValueError("n must be positive")
    if not isinstance(law, InitialLaw):
        law = InitialLaw(tuple(law))
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(law.floats)
    cdf[-1] = 1.0
    states = np.searchsorted(cdf, rng.random(n), side="right") + 1
    return StateVector(states, law.k, 0)


def stats_from_counts(counts: Sequence[int], law: InitialLaw) -> PartitionStats:
    counts = tuple(int(c) for c in counts)
    if len(counts) != law.k:
        raise ValueError("counts and law disagree on k")
    leaders = law.leaders
    k0 = len(leaders)
    n_star = sum(counts[i - 1] for i in leaders)
    if n_star > 0:
        root = math.sqrt(n_star)
        c = tuple((counts[i - 1] - n_star / k0) / root for i in leaders)
    else:
        c = tuple(0.0 for _ in leaders)
    return PartitionStats(counts, leaders, n_star, c, law.lambda_max)


def compute_stats(s0: StateVector, law: InitialLaw) -> PartitionStats:
    if s0.round != 0:
        raise ValueError("statistics are defined for the initial configuration only")
    return stats_from_counts(s0.counts(), law)


def check_events(stats: PartitionStats, n: int, law: InitialLaw, delta: float) -> EventVerdicts:
    """Evaluate the initial-configuration events on one realisation.

    * ``e0``: ``|n_i - n lambda_i| <= ln n * sqrt(n)`` for every state.
    * ``p0``: ``|n* - n k0 lambda_max| < k0 sqrt(n) ln n``.
    * ``e_delta_n``: every leader has ``delta < |c_i| <= 1/delta`` and, with
      leaders sorted by ``c`` descending, consecutive gaps exceed ``delta``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    ln = math.log(n) if n > 1 else 0.0
    lam = law.floats
    e0 = all(abs(ni - n * li) <= ln * math.sqrt(n) for ni, li in zip(stats.counts, lam))
    k0 = stats.k0
    p0 = abs(stats.n_star - n * k0 * law.lambda_max) < k0 * math.sqrt(n) * ln
    event_1 = all(delta < abs(ci) <= 1.0 / delta for ci in stats.c)
    cs = sorted(stats.c, reverse=True)
    event_2 = all(cs[j] - cs[j + 1] > delta for j in range(len(cs) - 1))
    return EventVerdicts(e0, p0, event_1 and event_2, delta, event_1, event_2)


def n_star_v_rate(g, s0: StateVector, law: InitialLaw, p: float) -> float:
    """Fraction of vertices with ``|n*(v) - n*_v p| <= k0 ln n sqrt(n p)``."""
    leaders = np.array(law.leaders)
    in_star = np.isin(s0.states, leaders)
    labels = in_star.astype(np.int64)
    n_star_of_v = g.label_counts(labels, 2)[:, 1]
    n_star_v = in_star.sum() - in_star.astype(np.int64)
    n = g.n
    bound = len(leaders) * math.log(n) * math.sqrt(n * p)
    return float(np.mean(np.abs(n_star_of_v - n_star_v * p) <= bound))
