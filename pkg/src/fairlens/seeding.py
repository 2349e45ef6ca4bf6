"""Deterministic seed derivation.

Every randomized stage of a run (split, oversampling, training, explanation
sampling) draws from its own generator derived from the run seed plus a small
integer salt, so stages stay decorrelated while the whole run is reproducible.
"""

from __future__ import annotations

import numpy as np

# Stage salts. Keep values stable: they are part of the reproducibility contract.
SPLIT = 11
SMOTE = 23
TRAIN = 37
LIME = 53
SUBSAMPLE = 67


def derived_rng(*keys: int) -> np.random.Generator:
    """Generator seeded from an ordered tuple of integer keys."""
    return np.random.default_rng(np.random.SeedSequence(list(keys)))


def derived_seed(*keys: int) -> int:
    """Single integer seed derived from an ordered tuple of integer keys."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1, dtype=np.uint64)[0])
