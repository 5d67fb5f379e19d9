"""Seeded random streams.

Every stochastic routine takes an integer seed and builds a counter-based
Philox generator from it.  Child seeds for trials and purposes are derived
with ``SeedSequence`` spawn keys, so adding a new purpose never shifts the
draws of an existing one.
"""
from __future__ import annotations

import zlib

import numpy as np


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def child_seed(seed: int, *keys) -> int:
    """Mix ``seed`` with a tuple of ints/strings into a new 63-bit seed."""
    spawn = []
    for k in keys:
        if isinstance(k, str):
            k = zlib.crc32(k.encode())
        spawn.append(int(k))
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(spawn))
    hi, lo = (int(v) for v in ss.generate_state(2, dtype=np.uint32))
    return ((hi << 32) | lo) >> 1
