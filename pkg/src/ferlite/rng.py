"""Deterministic random-number streams.

Every stochastic component (weight init, dropout, shuffling, augmentation)
draws from a PCG64 generator derived from the global seed plus a fixed
stream tag and optional indices (epoch, sample, ...).  Identical seeds
therefore reproduce identical scalar sequences across runs, and per-item
streams are independent of processing order.
"""

import numpy as np

# Stream tags; never reorder or renumber, checkpoint reproducibility
# depends on them.
INIT = 0
SHUFFLE = 1
AUGMENT = 2
DROPOUT = 3
SPLIT = 4


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by (seed, *path)."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *path])))
