"""Seeded, splittable random streams.

Every consumer (batch sampling, synthetic data, Monte-Carlo trials) gets
its own PCG64 stream derived from the run seed and a fixed key, so adding
draws in one place never shifts the sequence seen by another.
"""

import numpy as np

SAMPLING = 0
SYNTHETIC = 1
ORACLE = 2


class RngStream:
    def __init__(self, seed, key=()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.key = tuple(key)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def substream(self, *key) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(key))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self.key})"


def sample_without_replacement(rng, n, m) -> np.ndarray:
    """``m`` distinct indices drawn uniformly from ``range(n)``."""
    if not 1 <= m <= n:
        raise ValueError(f"cannot draw {m} distinct indices from {n}")
    gen = rng.generator if isinstance(rng, RngStream) else rng
    return gen.choice(n, size=m, replace=False)
