"""Counter-based random streams.

A stream is identified by ``(seed, index)``.  The Philox key is the seed and
the stream index sits in the second counter word, so every stream is a fixed
function of the pair and never overlaps another one.  Monte Carlo estimators
cut their sample range into fixed-size blocks and give block ``j`` stream
``j``; the result therefore does not depend on how blocks are handed out to
workers.
"""
from __future__ import annotations

import secrets

import numpy as np

SEED_BITS = 64
BLOCK_SIZE = 1 << 16


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**SEED_BITS:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def fresh_seed() -> int:
    """Draw a seed from OS entropy (opt-in; everything else is seeded)."""
    return secrets.randbits(SEED_BITS)


class RandomStream:
    """Deterministic uniform source keyed by ``(seed, index)``."""

    def __init__(self, seed: int = 0, index: int = 0):
        self.seed = check_seed(seed)
        self.index = int(index)
        if self.index < 0:
            raise ValueError("stream index must be non-negative")
        bitgen = np.random.Philox(key=self.seed, counter=[0, self.index, 0, 0])
        self._gen = np.random.Generator(bitgen)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, index={self.index})"

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def spawn(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, index)


def block_ranges(n: int, block_size: int = BLOCK_SIZE):
    """Yield ``(block_index, count)`` covering ``n`` samples in order."""
    nblocks = -(-n // block_size)
    for j in range(nblocks):
        yield j, min(block_size, n - j * block_size)
