"""Deterministic splittable random streams.

Streams are Philox counter-based generators derived from a root seed plus an
integer path, so any component (shuffle, dropout layer, ensemble member) can
re-create its own stream from ``(seed, *path)`` without coordinating with
anything else.
"""

from __future__ import annotations

import numpy as np


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Generator at derivation path ``(seed, *path)``; same path, same stream."""
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(int(p) for p in path)
    )
    return np.random.Generator(np.random.Philox(sequence))
