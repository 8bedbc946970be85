"""Seed derivation.

Every random stream in the package comes from a PCG64 generator seeded
through ``numpy.random.SeedSequence``. A child stream is identified by
``(master_seed, tag, *indices)``: the tag string is mapped to a stable
32-bit integer with CRC-32 and becomes the first element of the spawn
key, followed by the integer indices. The same triple always yields the
same stream on every platform and under any parallel schedule.
"""

from __future__ import annotations

import secrets
import zlib

import numpy as np

SEED_BITS = 63


def tag_code(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF


def derive_seed(master_seed: int, tag: str, *indices: int) -> int:
    """Return a 63-bit integer seed for the stream ``(master_seed, tag, *indices)``."""
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    key = (tag_code(tag),) + tuple(int(i) for i in indices)
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    word = int(seq.generate_state(1, dtype=np.uint64)[0])
    return word >> (64 - SEED_BITS)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def child_rng(master_seed: int, tag: str, *indices: int) -> np.random.Generator:
    return make_rng(derive_seed(master_seed, tag, *indices))


def fresh_seed() -> int:
    """Draw a seed from OS entropy (for runs where the caller gave none)."""
    return secrets.randbits(32)
