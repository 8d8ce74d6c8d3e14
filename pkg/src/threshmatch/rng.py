"""Counter-derived random streams.

All randomness in the package flows from a single unsigned master seed.
Child streams are derived from ``(master, *path)`` counter tuples via
``numpy.random.SeedSequence``, so any replicate can be recomputed in
isolation and parallel schedules cannot change results.
"""

from __future__ import annotations

import numpy as np


def derive_seed(master: int, *path: int) -> int:
    """Return the u64 seed for the child stream at ``(master, *path)``."""
    ss = np.random.SeedSequence(entropy=[int(master), *map(int, path)])
    return int(ss.generate_state(1, np.uint64)[0])


def rng_from(master: int, *path: int) -> np.random.Generator:
    """Return a fresh Generator for the child stream at ``(master, *path)``."""
    ss = np.random.SeedSequence(entropy=[int(master), *map(int, path)])
    return np.random.default_rng(ss)
