"""Deterministic seed derivation.

Children are derived from ``(entropy, spawn_key)`` without touching the
parent's spawn counter, so passing the same seed twice always gives the
same streams regardless of call history or worker scheduling.
"""

from __future__ import annotations

import numpy as np


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child_seeds(seed, count: int, *prefix: int) -> list[np.random.SeedSequence]:
    """``count`` independent children of ``seed``, optionally under ``prefix``."""
    ss = as_seed_sequence(seed)
    base = tuple(ss.spawn_key) + tuple(int(p) for p in prefix)
    return [np.random.SeedSequence(ss.entropy, spawn_key=base + (k,), pool_size=ss.pool_size)
            for k in range(count)]


def fresh_seed() -> int:
    """Draw a new master seed from OS entropy (callers should print it)."""
    return int(np.random.SeedSequence().entropy % (2 ** 63))
