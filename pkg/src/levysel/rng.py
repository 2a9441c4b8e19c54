"""Deterministic random-number streams.

Every stochastic routine takes an RngStream value instead of a live generator, so a
call is a pure function of its arguments: the same (seed, stream_id) always yields
the same draws, and distinct stream ids give statistically independent streams (via
SeedSequence spawn keys). Monte Carlo replication r of a run with base seed s uses
stream_id = s XOR r, which makes results independent of execution order and of the
degree of parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Value object identifying one reproducible stream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def replication_stream(base_seed: int, replication: int) -> RngStream:
    """Stream for Monte Carlo replication `replication` of a run seeded `base_seed`."""
    return RngStream(seed=base_seed, stream_id=base_seed ^ replication)
