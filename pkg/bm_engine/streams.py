"""
Seeded random streams.

Every Monte Carlo trial owns an independent numpy Generator derived from the
master seed and the trial index, so any trial can be regenerated on its own
and results never depend on how trials are split across workers.
"""

import numpy as np

RandomStream = np.random.Generator


def stream_for(seed: int, *key: int) -> RandomStream:
    """
    Return the generator for `key` (e.g. a trial index) under master `seed`.
    """
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(sequence)
