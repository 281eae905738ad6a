"""Seeded random streams.

All randomness flows from a single integer seed through counter-based Philox
streams, so replication ``r`` draws the same numbers whichever worker runs it.
"""

import numpy as np


def make_rng(seed: int, *counters: int) -> np.random.Generator:
    """Independent Philox stream keyed by ``seed`` and optional counters."""
    entropy = [int(seed), *(int(c) for c in counters)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
