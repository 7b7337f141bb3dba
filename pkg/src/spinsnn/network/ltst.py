"""Long-term / short-term dual-crossbar significance architecture."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bench import EnergyLedger
from ..plasticity import StdpParams
from ..rng import RngStream, as_stream
from . import _kernel as K
from .unsupervised import (NetworkConfig, init_weights, make_engine, run_training,
                           validate_images)


@dataclass(frozen=True)
class LtStConfig:
    """LT learns with the shorter STDP window and is read at the higher voltage."""

    lt_params: StdpParams = StdpParams(A_plus=0.03, A_minus=0.0, tau_plus=100e-9,
                                       tau_minus=100e-9)
    st_params: StdpParams = StdpParams(A_plus=0.015, A_minus=0.0, tau_plus=400e-9,
                                       tau_minus=400e-9)
    lt_read_voltage: float = 0.1
    st_read_voltage: float = 0.05
    lt_silent_depression: float = 0.025
    st_silent_depression: float = 0.012

    def __post_init__(self):
        if self.lt_params.tau_plus > self.st_params.tau_plus:
            raise ValueError("the LT array needs the shorter STDP time constant")
        if self.lt_read_voltage < self.st_read_voltage:
            raise ValueError("the LT array must be read at the higher voltage")
        if self.st_read_voltage <= 0:
            raise ValueError("read voltages must be positive")

    @property
    def arrays(self):
        return [(self.lt_params, self.lt_read_voltage, self.lt_silent_depression),
                (self.st_params, self.st_read_voltage, self.st_silent_depression)]

    @property
    def read_voltages(self):
        return (self.lt_read_voltage, self.st_read_voltage)


@dataclass
class LtStResult:
    lt_weights: np.ndarray
    st_weights: np.ndarray
    thresholds: np.ndarray
    ledger: EnergyLedger
    programming_energy: np.ndarray  # (LT, ST) J
    programming_events: np.ndarray  # (LT, ST)
    convergence: list  # per epoch: (cumulative programming energy J, mean |dW| of the epoch)
    epoch_counts: list

    @property
    def weights(self) -> np.ndarray:
        return np.stack([self.lt_weights, self.st_weights])

    @property
    def total_programming_energy(self) -> float:
        return float(self.programming_energy.sum())


def train_lt_st(images, cfg: NetworkConfig = NetworkConfig(), ltst: LtStConfig = LtStConfig(),
                epochs: int = 1, rng: RngStream | int = 0, weights=None) -> LtStResult:
    """Train the LT and ST crossbars side by side; neurons integrate both currents."""
    x = validate_images(images)
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    rng = as_stream(rng)
    W = init_weights(cfg, x.shape[1], rng.named("init"), 2) if weights is None else np.array(weights, float)
    if W.shape != (2, x.shape[1], cfg.n_neurons):
        raise ValueError(f"LT/ST weights must have shape (2, {x.shape[1]}, {cfg.n_neurons})")
    engine = make_engine(cfg, W, np.full(cfg.n_neurons, cfg.homeostasis.theta_floor), ltst.arrays)
    history = []
    prev = [engine.W.copy()]

    def track(epoch, eng):
        history.append((float(eng.stats[:, K.S_PROG_J].sum()),
                        float(np.abs(eng.W - prev[0]).mean())))
        prev[0] = eng.W.copy()

    counts = run_training(engine, x, epochs, rng, track)
    return LtStResult(engine.W[0].copy(), engine.W[1].copy(), engine.theta.copy(), engine.ledger(),
                      engine.programming_energy(), engine.stats[:, K.S_PROG_EVENTS].copy(),
                      history, counts)
