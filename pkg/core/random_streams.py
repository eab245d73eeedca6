"""Counter-based random streams keyed by (master seed, indices, label).

Every logical stream gets its own Philox generator whose key is derived
from the master seed and a spawn key, so the numbers a run sees do not
depend on which worker simulates it or in what order.
"""

import zlib

import numpy as np

from .exceptions import DomainError

SEED_MASK = (1 << 64) - 1


def label_key(label: str) -> int:
    """Return a process-independent integer for a stream label."""
    return zlib.crc32(label.encode("utf-8"))


def make_generator(master_seed: int, *indices: int, label: str = "default") -> np.random.Generator:
    """Return the generator for one logical stream.

    Args:
        master_seed: Unsigned 64-bit campaign seed
        *indices: Nonnegative integers locating the stream (setting, run, ...)
        label: Stream name, e.g. "sequence" or "calibration"

    Returns:
        Independent numpy Generator backed by Philox

    Raises:
        DomainError: If the seed or an index is negative
    """
    if master_seed < 0 or master_seed > SEED_MASK:
        raise DomainError(f"master_seed must be an unsigned 64-bit integer, got {master_seed!r}")
    if any(i < 0 for i in indices):
        raise DomainError(f"stream indices must be nonnegative, got {indices!r}")
    spawn_key = tuple(int(i) for i in indices) + (label_key(label),)
    seed_seq = np.random.SeedSequence(int(master_seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(seed_seq))
