"""Simulation and verification toolkit for synchronous k-state majority dynamics on G(n, p)."""

from .dynamics import StateVector, TrialRecord, majority_step, run_trial
from .graph import Graph, MemoryGuardError, VertexSubset, sample_gnp
from .harness import ExperimentConfig, SweepConfig, run_experiment, run_sweep
from .init_config import InitialLaw, check_events, compute_stats, sample_initial

__all__ = [
    "ExperimentConfig", "Graph", "InitialLaw", "MemoryGuardError", "StateVector", "SweepConfig",
    "TrialRecord", "VertexSubset", "check_events", "compute_stats", "majority_step", "run_experiment",
    "run_sweep", "run_trial", "sample_gnp", "sample_initial",
]
__version__ = "0.1.0"
