"""Reproducible random streams.

Every noise source of every replication gets its own Philox generator,
keyed by ``(seed, stream, source)``.  Philox is counter based, so a stream's
output depends only on its key and on how many values were drawn, never on
which thread consumed it or in what order replications were scheduled.
"""

import numpy as np

EPS_SOURCE = 0


def eta_source(k):
    """Source id of the coefficient noise attached to lag ``k`` (0-based)."""
    return 1 + k


def generator(seed, stream=0, source=0):
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=(int(stream), int(source)))
    return np.random.Generator(np.random.Philox(ss))
