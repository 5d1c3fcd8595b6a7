"""Synchronous k-state majority dynamics with keyed random tie-breaking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import Graph, VertexSubset
from .rng import keyed_uniforms


@dataclass(frozen=True, eq=False)
class StateVector:
    """Per-vertex states in ``1..k`` after round ``round`` (0 is the initial state)."""

    states: np.ndarray
    k: int
    round: int = 0

    def __post_init__(self):
        s = np.asarray(self.states)
        if s.ndim != 1:
            raise ValueError("states must be a 1-d array")
        if self.k < 1:
            raise ValueError("k must be positive")
        if s.size and (s.min() < 1 or s.max() > self.k):
            raise ValueError("states must lie in 1..k")
        if self.round < 0:
            raise ValueError("round must be non-negative")
        s = s.astype(np.int16, copy=True)
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @property
    def n(self) -> int:
        return self.states.size

    def counts(self) -> np.ndarray:
        """Part sizes ``n_1..n_k``."""
        return np.bincount(self.states, minlength=self.k + 1)[1:].astype(np.int64)

    def is_unanimous(self) -> bool:
        return self.n > 0 and bool(np.all(self.states == self.states[0]))

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.k == other.k and self.round == other.round and np.array_equal(self.states, other.states)


@dataclass(frozen=True, eq=False)
class StepOutcome:
    next: StateVector
    tie_set: VertexSubset
    strong_counts: np.ndarray  # X_1..X_k, strict-unique-maximum adoptions


@dataclass
class TrialRecord:
    """Outcome of one run of the dynamics.

    ``part_sizes_by_round[t]`` holds the k part sizes after round ``t`` (index 0
    is the initial configuration); ``tie_count_by_round[t - 1]`` is the number of
    tied vertices in round ``t``.
    """

    seed: int
    n: int
    k: int
    initial_counts: tuple
    part_sizes_by_round: list
    tie_count_by_round: list
    strong_counts_round1: tuple
    rounds_to_unanimity: int = -1
    winner: int = 0
    trial_id: int = 0
    p: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def rounds_run(self) -> int:
        return len(self.tie_count_by_round)

    def parts_after(self, t: int) -> tuple | None:
        if t < len(self.part_sizes_by_round):
            return self.part_sizes_by_round[t]
        return None

    def ties_in(self, t: int) -> int | None:
        if 1 <= t <= len(self.tie_count_by_round):
            return self.tie_count_by_round[t - 1]
        return None


def _resolve(counts: np.ndarray, trial_seed: int, round_: int):
    """Pick next states (0-based) from an ``(n, k)`` neighbour-count matrix."""
    top = counts.max(axis=1)
    is_max = counts == top[:, None]
    n_max = is_max.sum(axis=1)
    nxt = np.argmax(is_max, axis=1)
    tied = np.flatnonzero(n_max > 1)
    if tied.size:
        u = keyed_uniforms(trial_seed, round_, tied)
        pick = np.minimum((u * n_max[tied]).astype(np.int64), n_max[tied] - 1)
        rank = np.cumsum(is_max[tied], axis=1) - 1
        hit = is_max[tied] & (rank == pick[:, None])
        nxt[tied] = np.argmax(hit, axis=1)
    return nxt, n_max == 1, tied


def majority_step(g: Graph, s: StateVector, trial_seed: int, round: int) -> StepOutcome:
    """Apply one synchronous majority update to ``s``.

    A vertex whose neighbour counts have a unique maximum adopts that state;
    otherwise it draws uniformly from the maximising states.  A vertex with no
    neighbours sees all counts equal to zero and so draws from all k states.
    """
    if s.n != g.n:
        raise ValueError(f"state vector has length {s.n}, graph has {g.n} vertices")
    if s.k < 2:
        raise ValueError("need at least two states")
    if round < 1:
        raise ValueError("round must be positive")
    counts = g.label_counts(s.states.astype(np.int64) - 1, s.k)
    nxt, strong, tied = _resolve(counts, trial_seed, round)
    strong_counts = np.bincount(nxt[strong], minlength=s.k).astype(np.int64)
    return StepOutcome(
        next=StateVector(nxt + 1, s.k, round),
        tie_set=VertexSubset(frozenset(tied.tolist()), g.n),
        strong_counts=strong_counts,
    )


def run_trial(
    g: Graph,
    s0: StateVector,
    trial_seed: int,
    max_rounds: int = 10,
    min_rounds: int = 3,
    on_step: Callable[[int, StateVector, StepOutcome], None] | None = None,
) -> TrialRecord:
    """Run the dynamics from ``s0`` until unanimity or ``max_rounds``.

    At least ``min(min_rounds, max_rounds)`` rounds are always executed so that
    the per-round columns of the trial CSV are populated.  ``on_step`` is called
    after every round with ``(t, previous_state, outcome)``.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    init = tuple(int(c) for c in s0.counts())
    rec = TrialRecord(
        seed=trial_seed,
        n=g.n,
        k=s0.k,
        initial_counts=init,
        part_sizes_by_round=[init],
        tie_count_by_round=[],
        strong_counts_round1=(),
    )
    if s0.is_unanimous():
        rec.rounds_to_unanimity = 0
        rec.winner = int(s0.states[0])
    state = s0
    for t in range(1, max_rounds + 1):
        out = majority_step(g, state, trial_seed, t)
        if on_step is not None:
            on_step(t, state, out)
        state = out.next
        rec.part_sizes_by_round.append(tuple(int(c) for c in state.counts()))
        rec.tie_count_by_round.append(len(out.tie_set))
        if t == 1:
            rec.strong_counts_round1 = tuple(int(x) for x in out.strong_counts)
        if rec.rounds_to_unanimity < 0 and state.is_unanimous():
            rec.rounds_to_unanimity = t
            rec.winner = int(state.states[0])
        if rec.rounds_to_unanimity >= 0 and t >= min_rounds:
            break
    return rec
