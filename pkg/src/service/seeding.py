"""
Seed derivation.

Every random stream in a run is derived from one master seed through
``numpy.random.SeedSequence`` spawn keys, so a stream depends only on its own
position in the (grid point, trial, purpose) tree.
"""

import numpy as np

# Purposes under one trial.
FORMULA_STREAM = 0
ALGORITHM_STREAM = 1


def derive_seed(master: int, *key: int) -> int:
    """
    A 63-bit integer seed for the stream at ``key`` under ``master``.

    Examples:
        >>> derive_seed(7, 0, 1) == derive_seed(7, 0, 1)
        True
        >>> derive_seed(7, 0, 1) == derive_seed(7, 1, 0)
        False
    """
    sequence = np.random.SeedSequence(master, spawn_key=tuple(key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def trial_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (permutation, bit) generators of one trial."""
    permutation, bits = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(permutation), np.random.default_rng(bits)
