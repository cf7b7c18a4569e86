"""Deterministic substream derivation for parallel Monte Carlo work.

Every random draw in the package comes from a generator derived here by a
(master_seed, integer key path) pair, so results depend only on the seed and
the logical task identity, never on thread scheduling or call order.
"""

from __future__ import annotations

import numpy as np


def derive_seed_sequence(master_seed: int, *key: int) -> np.random.SeedSequence:
    """SeedSequence for the named substream (tag, index, index, ...) of a seed."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Fresh PCG64 generator for the named substream."""
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(master_seed, *key)))


def derive_seed(master_seed: int, *key: int) -> int:
    """64-bit integer seed for the named substream, for configs that carry seeds."""
    state = derive_seed_sequence(master_seed, *key).generate_state(2)
    return int(state[0]) << 32 | int(state[1])
