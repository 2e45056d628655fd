"""
Keyed random streams.

Every consumer of randomness asks for its own generator keyed by the base
seed plus a path of names or indices, so results are independent of the
order in which consumers run.
"""
import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, (bool, np.bool_)):
        raise TypeError("Seed keys must be int or str")
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"Seed keys must be non-negative, got {key}")
        return int(key)
    return zlib.crc32(key.encode("utf-8"))


def make_rng(seed: int, *keys: Key) -> np.random.Generator:
    """
    Build a Philox-backed generator for (seed, *keys).

    Args:
        seed: Base 64-bit seed
        *keys: Stream path, e.g. ("split",) or ("learner", "rf", "tree", 3)

    Returns:
        Independent numpy Generator
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key_to_int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *keys: Key) -> int:
    """Derive a child 64-bit seed from (seed, *keys)."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key_to_int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])
