"""Seeded, portable sampling without replacement.

The stream is fully specified so selections reproduce across platforms and
numpy releases:

* bit generator: PCG64 seeded by ``SeedSequence(seed mod 2**64,
  spawn_key=(crc32(stage),))`` where ``stage`` names the consumer
  (``"stratified"``, ``"random"``, ...);
* ``below(n)``: draw raw 64-bit words, reject those >= ``2**64 - 2**64 % n``,
  return ``word % n``;
* ``sample(items, m)``: partial Fisher-Yates; for ``i`` in ``0..m-1`` swap
  position ``i`` with ``i + below(len - i)`` and return the first ``m``.
"""

from __future__ import annotations

import zlib

import numpy as np

_TWO64 = 1 << 64


def stage_seed_sequence(seed: int, stage: str) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed) % _TWO64, spawn_key=(zlib.crc32(stage.encode("utf-8")),))


class StageRNG:
    def __init__(self, seed: int, stage: str):
        self.seed = int(seed)
        self.stage = stage
        self._bits = np.random.PCG64(stage_seed_sequence(seed, stage))

    def raw(self) -> int:
        return int(self._bits.random_raw())

    def below(self, n: int) -> int:
        if n < 1:
            raise ValueError("n must be positive")
        limit = _TWO64 - (_TWO64 % n)
        while True:
            x = self.raw()
            if x < limit:
                return x % n

    def sample(self, items, m: int) -> list:
        pool = list(items)
        if not 0 <= m <= len(pool):
            raise ValueError(f"cannot sample {m} of {len(pool)} items")
        for i in range(m):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:m]
