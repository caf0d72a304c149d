"""Counter-derived random streams.

``stream(seed, i, j, ...)`` is a pure function of its arguments, so work split
into batches draws the same numbers whichever worker runs which batch.
"""

from __future__ import annotations

import numpy as np

BATCH_SIZE = 2**14


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def batches(trials: int, batch_size: int = BATCH_SIZE) -> list[tuple[int, int]]:
    """``(batch_index, size)`` pairs covering ``trials``."""
    full, rest = divmod(trials, batch_size)
    out = [(i, batch_size) for i in range(full)]
    if rest:
        out.append((full, rest))
    return out
