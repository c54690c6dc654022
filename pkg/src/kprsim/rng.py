"""Seedable random streams.

Every stream is a numpy ``Generator`` over the PCG64 bit generator, whose
output is fixed by its published algorithm and identical across platforms.
The stream for run ``r`` of master seed ``s`` is seeded from
``SeedSequence(entropy=s, spawn_key=(r,))``, numpy's documented hash-based
mixing, so runs of the same master seed are statistically independent.

Doubles come from the top 53 bits of one 64-bit output, so a scalar
``random()`` and an element of ``random(n)`` consume exactly one draw each.
"""

from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1


class RngStream:
    def __init__(self, seed: int, run: int = 0):
        if not (0 <= seed <= MAX_SEED):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if run < 0:
            raise ValueError(f"run index must be non-negative, got {run}")
        self.seed = seed
        self.run = run
        seq = np.random.SeedSequence(entropy=seed, spawn_key=(run,))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def random(self) -> float:
        """One uniform draw in [0, 1)."""
        return float(self._gen.random())

    def random_array(self, n: int) -> np.ndarray:
        """``n`` uniform draws in [0, 1), in stream order."""
        return self._gen.random(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, run={self.run})"
