"""Counter-based random streams keyed by (seed, step, member, channel).

Each draw site gets its own Philox generator derived from the run seed
and its position in the schedule, so the draw consumed for one member at
one step never depends on evaluation order or parallelism.
"""
from __future__ import annotations

import numpy as np

CH_OBS_NOISE = 0
CH_PCN = 1
CH_BROWNIAN = 2
CH_DIFFUSION = 3


class CounterStream:
    """Factory of independent generators addressed by integer keys."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)

    def generator(self, *key: int) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.seed, spawn_key=tuple(int(k) for k in key)
        )
        return np.random.Generator(np.random.Philox(seq))

    def normal(self, key: tuple, size) -> np.ndarray:
        return self.generator(*key).standard_normal(size)
