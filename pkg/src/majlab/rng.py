"""Seed splitting and counter-based per-vertex randomness.

Everything random in a trial is derived from a single 64-bit trial seed.
Trial seeds come from ``split_seed(master_seed, trial_index)``, which is the
SplitMix64 finaliser applied to ``master + (index + 1) * GOLDEN``.  Because the
finaliser is a bijection on 64-bit words and ``GOLDEN`` is odd, distinct
indices below 2**64 always give distinct seeds.

Tie-breaking draws are keyed, not streamed: the uniform used by vertex ``v`` in
round ``t`` is ``mix64(trial_seed ^ mix64(t << 32 | v))``, so it does not depend on
evaluation order or on how the vertices are split across workers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def split_seed(seed: int, index: int) -> int:
    """Child seed number ``index`` of ``seed``; injective in ``index``."""
    if index < 0:
        raise ValueError("index must be non-negative")
    return mix64((seed + (index + 1) * GOLDEN) & MASK64)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(_M1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_M2)
        z ^= z >> np.uint64(31)
    return z


def keyed_uniforms(trial_seed: int, round_: int, vertices: np.ndarray) -> np.ndarray:
    """Uniforms in [0, 1) for ``vertices`` in ``round_``, keyed by ``trial_seed``."""
    v = np.asarray(vertices, dtype=np.uint64)
    counter = (np.uint64(round_ & 0xFFFFFFFF) << np.uint64(32)) | v
    key = _mix64_array(counter) ^ np.uint64(trial_seed & MASK64)
    out = _mix64_array(key)
    return (out >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
