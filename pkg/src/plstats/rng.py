"""Seeded random streams.

Every random quantity in the package is drawn from a stream derived from one
64-bit master seed plus a tuple of integer keys (replication index, purpose).
Streams are built with :class:`numpy.random.SeedSequence` spawn keys, so a
replication can be regenerated in isolation and the result does not depend on
which worker produced it.
"""

from __future__ import annotations

import numpy as np

# purpose tags used as the first spawn-key component
MATRIX = 0
LABELS = 1
LIMIT = 2
SAMPLING = 3
UNIFORMS = 4

_MASK64 = (1 << 64) - 1


def _check_seed(seed: int) -> int:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if seed < 0 or seed > _MASK64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def derive(master_seed: int, *keys: int) -> np.random.Generator:
    """Return an independent generator for ``(master_seed, *keys)``."""
    ss = np.random.SeedSequence(_check_seed(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def generator(seed) -> np.random.Generator:
    """Accept an int seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return derive(seed)
