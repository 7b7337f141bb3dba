"""Deterministic random streams.

Every stochastic routine takes an :class:`RngStream`.  A stream is a pure
description ``(seed, stream_id)``; generators are materialised on demand so two
streams with the same key always replay the same draws, no matter how work is
split between workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) <= _MASK64:
                raise ValueError(f"{name} must fit in 64 unsigned bits, got {value}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. one per Monte Carlo trial."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), int(index)))
        return RngStream(self.seed, int(ss.generate_state(1, np.uint64)[0]))

    def named(self, name: str) -> "RngStream":
        """Sub-stream keyed by a label, so adding a consumer never shifts another's draws."""
        digest = hashlib.sha256(f"{self.stream_id}:{name}".encode()).digest()
        return RngStream(self.seed, int.from_bytes(digest[:8], "little"))


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError(f"expected RngStream or integer seed, got {type(rng).__name__}")
