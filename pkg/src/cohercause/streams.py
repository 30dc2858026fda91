"""Deterministic random-stream derivation for parallel Monte Carlo."""
from __future__ import annotations

import numpy as np


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for (master seed, stream key).

    Streams with distinct keys are statistically independent; the same
    (seed, key) pair always yields the same generator state, regardless
    of how many workers the caller partitions its job across.
    """
    if any(k < 0 for k in key):
        raise ValueError("stream key indices must be non-negative")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))
