"""Poisson rate encoding of analog inputs into spike trains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import RngStream, as_stream


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class SpikeTrain:
    spikes: np.ndarray  # (timesteps, inputs) of 0/1
    dt: float

    def __post_init__(self):
        s = np.asarray(self.spikes)
        if s.ndim != 2:
            raise ValueError("spike train must be (timesteps, inputs)")
        if not np.isin(s, (0, 1)).all():
            raise ValueError("spike entries must be 0 or 1")
        s = s.astype(np.uint8)
        s.setflags(write=False)
        object.__setattr__(self, "spikes", s)

    @property
    def timesteps(self) -> int:
        return self.spikes.shape[0]

    def counts(self) -> np.ndarray:
        return self.spikes.sum(0, dtype=np.int64)


def spike_probability(image, max_rate: float, dt: float) -> np.ndarray:
    x = np.asarray(image, dtype=float).ravel()
    if np.any(x < 0) or np.any(x > 1):
        raise EncodingError("intensities must lie in [0, 1]")
    p = x * max_rate * dt
    if np.any(p > 1 + 1e-12):
        raise EncodingError(f"spike probability {p.max():.4g} > 1: lower max_rate or dt")
    return np.minimum(p, 1.0)


def poisson_encode(image, timesteps: int, max_rate: float, dt: float,
                   rng: RngStream | int | np.random.Generator) -> SpikeTrain:
    """Bernoulli spike per (step, input) with p = intensity * max_rate * dt."""
    p = spike_probability(image, max_rate, dt)
    gen = rng if isinstance(rng, np.random.Generator) else as_stream(rng).generator()
    spikes = gen.random((timesteps, p.size)) < p
    return SpikeTrain(spikes.astype(np.uint8), dt)


def rate_for_peak(peak_probability: float, dt: float) -> float:
    """max_rate that gives ``peak_probability`` per step for a full-intensity input."""
    return peak_probability / dt
