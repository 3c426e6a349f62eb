"""Deterministic seed derivation.

Every random stream in the package is derived from a root seed plus a tuple
of integer keys (run index, class index, item index, ...) through numpy's
``SeedSequence`` spawn keys. Streams for different keys are independent and
do not depend on the order in which items are generated.
"""

from typing import Union

import numpy as np

from ..exceptions import DataGenerationError

Key = Union[int, np.integer]


def _check(seed: Key, keys: tuple) -> None:
    if int(seed) < 0 or int(seed) >= 2**64:
        raise DataGenerationError(f"Seed must be an unsigned 64-bit integer, got {seed}")
    if any(int(k) < 0 for k in keys):
        raise DataGenerationError(f"Stream keys must be nonnegative, got {keys}")


def seed_sequence(seed: Key, *keys: Key) -> np.random.SeedSequence:
    _check(seed, keys)
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))


def derive_rng(seed: Key, *keys: Key) -> np.random.Generator:
    """Return an independent PCG64 generator for ``(seed, *keys)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *keys)))


def derive_seed(seed: Key, *keys: Key) -> int:
    """Mix ``(seed, *keys)`` into a new 64-bit seed, e.g. the seed of run ``k``."""
    state = seed_sequence(seed, *keys).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
