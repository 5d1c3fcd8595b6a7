"""Experiment configuration, trial execution and result export.

Seeding: trial ``i`` gets ``trial_seed = split_seed(master_seed, i)``.  Its graph
seed is ``split_seed(trial_seed, 0)`` and its initial-configuration seed is
``split_seed(trial_seed, 1)``; the tie-breaking key is ``trial_seed`` itself.  In
fixed-graph (fixed-configuration) mode every trial instead uses
``split_seed(master_seed, GRAPH_STREAM)`` (``CONFIG_STREAM``).  Results depend on
the configuration alone, never on the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dynamics import StateVector, StepOutcome, TrialRecord, run_trial
from .graph import DENSE_MIN_EXPECTED_DEGREE, Graph, check_dense_memory, sample_gnp
from .init_config import InitialLaw, sample_initial
from .rng import split_seed

GRAPH_STREAM = 2**62
CONFIG_STREAM = 2**62 + 1
CSV_ROUNDS = 3


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: float
    k: int
    lam: tuple = ()
    n_trials: int = 1
    max_rounds: int = 10
    master_seed: int = 0
    resample_graph_per_trial: bool = True
    resample_config_per_trial: bool = True
    threads: int | None = None  # None: MAJLAB_THREADS or the CPU count

    def __post_init__(self):
        lam = tuple(str(x) for x in self.lam) or tuple(str(Fraction(1, self.k)) for _ in range(self.k))
        object.__setattr__(self, "lam", lam)
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if len(lam) != self.k:
            raise ValueError(f"lambda has {len(lam)} entries, k={self.k}")
        InitialLaw(lam)
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if not (self.resample_graph_per_trial or self.resample_config_per_trial):
            raise ValueError("cannot fix both the graph and the configuration")

    @property
    def law(self) -> InitialLaw:
        return InitialLaw(self.lam)

    @property
    def dense(self) -> bool:
        return self.p * self.n >= DENSE_MIN_EXPECTED_DEGREE

    def resolved_threads(self) -> int:
        if self.threads:
            return max(1, int(self.threads))
        env = os.environ.get("MAJLAB_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1

    def to_text(self) -> str:
        lines = [
            f"n = {self.n}",
            f"p = {self.p!r}",
            f"k = {self.k}",
            "lambda = [" + ", ".join(f'"{x}"' for x in self.lam) + "]",
            f"n_trials = {self.n_trials}",
            f"max_rounds = {self.max_rounds}",
            f"master_seed = {self.master_seed}",
            f"resample_graph_per_trial = {str(self.resample_graph_per_trial).lower()}",
            f"resample_config_per_trial = {str(self.resample_config_per_trial).lower()}",
        ]
        return "\n".join(lines) + "\n"


_INT_KEYS = {"n", "k", "n_trials", "max_rounds", "master_seed", "threads"}
_BOOL_KEYS = {"resample_graph_per_trial", "resample_config_per_trial"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "lambda":
        vals = json.loads(raw)
        if not isinstance(vals, list):
            raise ValueError("lambda must be a list")
        return tuple(str(v) for v in vals)
    if key in _BOOL_KEYS:
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"{key} must be true or false")
        return raw.lower() == "true"
    if key == "threads":
        return None if raw.lower() == "auto" else int(raw)
    if key in _INT_KEYS:
        return int(raw)
    if key == "p":
        return float(raw)
    raise ValueError(f"unknown config key {key!r}")


def parse_config_text(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        values[key.strip()] = _parse_value(key.strip(), raw)
    for key, raw in (overrides or {}).items():
        values[key] = _parse_value(key, raw) if isinstance(raw, str) else raw
    if "lambda" in values:
        values["lam"] = values.pop("lambda")
    missing = {"n", "p", "k"} - values.keys()
    if missing:
        raise ValueError(f"config is missing {sorted(missing)}")
    return ExperimentConfig(**values)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(), overrides)


# --- running trials -------------------------------------------------------------


def trial_seed(cfg: ExperimentConfig, i: int) -> int:
    return split_seed(cfg.master_seed, i)


def graph_seed(cfg: ExperimentConfig, i: int) -> int:
    if cfg.resample_graph_per_trial:
        return split_seed(trial_seed(cfg, i), 0)
    return split_seed(cfg.master_seed, GRAPH_STREAM)


def config_seed(cfg: ExperimentConfig, i: int) -> int:
    if cfg.resample_config_per_trial:
        return split_seed(trial_seed(cfg, i), 1)
    return split_seed(cfg.master_seed, CONFIG_STREAM)


def build_trial(cfg: ExperimentConfig, i: int, graph: Graph | None = None):
    """Graph, initial state and tie key for trial ``i``."""
    g = graph if graph is not None else sample_gnp(cfg.n, cfg.p, graph_seed(cfg, i))
    s0 = sample_initial(cfg.n, cfg.law, config_seed(cfg, i))
    return g, s0, trial_seed(cfg, i)


Probe = Callable[[Graph, StateVector, int, StepOutcome], object]


def _one_trial(cfg: ExperimentConfig, i: int, graph: Graph | None, probe: Probe | None) -> TrialRecord:
    g, s0, ts = build_trial(cfg, i, graph)
    captured = {}

    def on_step(t, prev, out):
        if probe is not None and t == 1:
            captured["probe"] = probe(g, s0, t, out)

    rec = run_trial(g, s0, ts, cfg.max_rounds, min_rounds=CSV_ROUNDS, on_step=on_step if probe else None)
    rec.trial_id = i
    rec.p = cfg.p
    if "probe" in captured:
        rec.extras["probe"] = captured["probe"]
    return rec


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    summary: dict = field(default_factory=dict)


def run_experiment(cfg: ExperimentConfig, probe: Probe | None = None) -> ExperimentResult:
    """Run ``cfg.n_trials`` independent trials; records come back in trial order.

    ``probe(graph, s0, 1, round1_outcome)`` is evaluated inside each trial while
    its graph is still alive; the return value is stored in ``record.extras``.
    """
    if cfg.dense:
        check_dense_memory(cfg.n)
    threads = min(cfg.resolved_threads(), cfg.n_trials)
    shared = None
    if not cfg.resample_graph_per_trial:
        shared = sample_gnp(cfg.n, cfg.p, graph_seed(cfg, 0))
    if threads == 1:
        records = [_one_trial(cfg, i, shared, probe) for i in range(cfg.n_trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda i: _one_trial(cfg, i, shared, probe), range(cfg.n_trials)))
    return ExperimentResult(cfg, records, summarize(records))


def _nan_mean(col: np.ndarray):
    col = col[~np.isnan(col)]
    return float(col.mean()) if col.size else None


def summarize(records: Sequence[TrialRecord]) -> dict:
    k = records[0].k
    rounds = np.array([r.rounds_to_unanimity for r in records])
    reached = rounds[rounds >= 0]
    x = np.array([r.strong_counts_round1 for r in records], dtype=float)
    ties = np.array([[r.ties_in(t) if r.ties_in(t) is not None else np.nan for t in range(1, CSV_ROUNDS + 1)]
                     for r in records])
    winners = {str(j): int(sum(r.winner == j for r in records)) for j in range(0, k + 1)}
    largest = [r.winner > 0 and r.initial_counts[r.winner - 1] == max(r.initial_counts) for r in records]
    return {
        "n_trials": len(records),
        "unanimous_fraction": float(np.mean(rounds >= 0)),
        "rounds_mean": float(reached.mean()) if reached.size else None,
        "rounds_sd": float(reached.std(ddof=1)) if reached.size > 1 else None,
        "rounds_histogram": {str(int(v)): int(np.sum(rounds == v)) for v in np.unique(rounds)},
        "tie_mean_by_round": [_nan_mean(col) for col in ties.T],
        "tie_sd_r1": float(np.nanstd(ties[:, 0], ddof=1)) if len(records) > 1 else 0.0,
        "x_strong_mean": x.mean(axis=0).tolist(),
        "x_strong_sd": x.std(axis=0, ddof=1).tolist() if len(records) > 1 else [0.0] * k,
        "winner_histogram": winners,
        "winner_is_largest_fraction": float(np.mean(largest)),
    }


# --- CSV ------------------------------------------------------------------------


def csv_header(k: int) -> list:
    cols = ["trial_id", "seed", "n", "p", "k", "rounds_to_unanimity", "winner"]
    cols += [f"tie_r{t}" for t in range(1, CSV_ROUNDS + 1)]
    cols += [f"n_init_{i}" for i in range(1, k + 1)]
    cols += [f"x_strong_{i}" for i in range(1, k + 1)]
    for t in range(1, CSV_ROUNDS + 1):
        cols += [f"parts_r{t}_{i}" for i in range(1, k + 1)]
    return cols


def csv_row(r: TrialRecord) -> list:
    row = [r.trial_id, r.seed, r.n, repr(float(r.p)) if r.p is not None else "", r.k, r.rounds_to_unanimity, r.winner]
    for t in range(1, CSV_ROUNDS + 1):
        v = r.ties_in(t)
        row.append("" if v is None else v)
    row += list(r.initial_counts)
    row += list(r.strong_counts_round1) if r.strong_counts_round1 else [""] * r.k
    for t in range(1, CSV_ROUNDS + 1):
        parts = r.parts_after(t)
        row += list(parts) if parts is not None else [""] * r.k
    return row


class TrialCsvWriter:
    """Append-only trial CSV; the header is written once when the file is created."""

    def __init__(self, path, k: int):
        self.path = Path(path)
        self.k = k
        if not self.path.exists() or self.path.stat().st_size == 0:
            with open(self.path, "w", newline="") as f:
                csv.writer(f, lineterminator="\n").writerow(csv_header(k))
        else:
            with open(self.path, newline="") as f:
                if next(csv.reader(f)) != csv_header(k):
                    raise ValueError(f"{self.path} has a different schema")

    def append(self, records: Sequence[TrialRecord]) -> None:
        with open(self.path, "a", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            for r in records:
                w.writerow(csv_row(r))


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(records[0].k))
    for r in records:
        w.writerow(csv_row(r))
    return buf.getvalue()


def read_trials_csv(path) -> list:
    """Rebuild ``TrialRecord`` objects (rounds 0..3) from a trial CSV."""
    out = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            k = int(row["k"])

            def vec(prefix):
                vals = [row[f"{prefix}{i}"] for i in range(1, k + 1)]
                return None if any(v == "" for v in vals) else tuple(int(v) for v in vals)

            init = vec("n_init_")
            parts = [init]
            ties = []
            for t in range(1, CSV_ROUNDS + 1):
                pt = vec(f"parts_r{t}_")
                if pt is None:
                    break
                parts.append(pt)
                ties.append(int(row[f"tie_r{t}"]))
            out.append(TrialRecord(
                seed=int(row["seed"]), n=int(row["n"]), k=k, initial_counts=init,
                part_sizes_by_round=parts, tie_count_by_round=ties,
                strong_counts_round1=vec("x_strong_") or (),
                rounds_to_unanimity=int(row["rounds_to_unanimity"]), winner=int(row["winner"]),
                trial_id=int(row["trial_id"]), p=float(row["p"]) if row["p"] else None,
            ))
    return out


def write_experiment(result: ExperimentResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "trials.csv"
    if csv_path.exists():
        csv_path.unlink()
    TrialCsvWriter(csv_path, result.config.k).append(result.records)
    (out / "config.txt").write_text(result.config.to_text())
    (out / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    return csv_path


# --- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    base: ExperimentConfig
    axis: str
    values: tuple

    def __post_init__(self):
        if self.axis not in ("n", "p"):
            raise ValueError("axis must be 'n' or 'p'")
        values = tuple(self.values)
        if len(values) < 3:
            raise ValueError("a sweep needs at least three values")
        if list(values) != sorted(values) or len(set(values)) != len(values):
            raise ValueError("sweep values must be strictly ascending")
        for v in values:
            self.point(v)
        object.__setattr__(self, "values", values)

    def point(self, value) -> ExperimentConfig:
        if self.axis == "n":
            return replace(self.base, n=int(value))
        return replace(self.base, p=float(value))


@dataclass
class SweepResult:
    config: SweepConfig
    results: dict  # value -> ExperimentResult
    fits: dict = field(default_factory=dict)


def tie_scaling_fit(results: dict, axis: str) -> dict:
    """Least-squares slope of log mean round-1 ties against log(n / p)."""
    xs, ys = [], []
    for res in results.values():
        cfg = res.config
        mean_ties = np.mean([r.ties_in(1) for r in res.records])
        if mean_ties <= 0:
            return {"tie_slope": None, "note": "zero mean tie count"}
        xs.append(math.log(cfg.n / cfg.p))
        ys.append(math.log(mean_ties))
    slope, intercept = np.polyfit(xs, ys, 1)
    return {"tie_slope": float(slope), "tie_intercept": float(intercept), "axis": axis}


def run_sweep(cfg: SweepConfig, probe: Probe | None = None) -> SweepResult:
    results = {v: run_experiment(cfg.point(v), probe) for v in cfg.values}
    return SweepResult(cfg, results, tie_scaling_fit(results, cfg.axis))


def write_sweep(result: SweepResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    axis = result.config.axis
    for v, res in result.results.items():
        write_experiment(res, out / f"{axis}={v}")
    meta = {"axis": axis, "values": list(result.config.values), "fits": result.fits}
    (out / "sweep.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out
