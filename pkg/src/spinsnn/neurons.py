"""Neuron device models with a common write / read / reset timestep."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .bench import EnergyLedger
from .devices import DwDeviceState, dw_advance, dw_conductance, dw_velocity, dw_write_energy
from .magnetodynamics import (MagnetParams, SwitchingCurve, default_axis, integrate_batch,
                              n_steps_for, spin_gain, thermalized_batch)
from .magnetodynamics.core import SheGeometry
from .rng import RngStream, as_stream


class NeuronKind(str, Enum):
    STEP = "step"
    NONSTEP = "nonstep"
    IF = "if"
    STOCHASTIC = "stochastic"
    LIF = "lif"


@dataclass(frozen=True)
class TimestepSchedule:
    write: float = 2e-9
    read: float = 0.1e-9
    reset: float = 2e-9

    def __post_init__(self):
        if min(self.write, self.read, self.reset) <= 0:
            raise ValueError("write, read and reset durations must all be positive")

    @property
    def duration(self) -> float:
        return self.write + self.read + self.reset


DW_SCHEDULE = TimestepSchedule(write=2e-9, read=0.1e-9, reset=2e-9)
MTJ_SCHEDULE = TimestepSchedule(write=0.5e-9, read=0.1e-9, reset=0.5e-9)


@dataclass(frozen=True)
class NeuronCellState:
    """One neuron: its kind, exactly one device state, threshold and refractory count."""

    kind: NeuronKind
    magnet: np.ndarray | None = None
    dw: DwDeviceState | None = None
    v_mem: float | None = None
    theta: float = 1.0
    refractory_remaining: int = 0

    def __post_init__(self):
        kind = NeuronKind(self.kind)
        object.__setattr__(self, "kind", kind)
        populated = [v is not None for v in (self.magnet, self.dw, self.v_mem)]
        if sum(populated) != 1:
            raise ValueError("exactly one device state must be populated")
        expected = {NeuronKind.STEP: 0, NeuronKind.STOCHASTIC: 0, NeuronKind.NONSTEP: 1,
                    NeuronKind.IF: 1, NeuronKind.LIF: 2}[kind]
        if not populated[expected]:
            raise ValueError(f"{kind.value} neuron carries the wrong device state")
        if not math.isfinite(self.theta):
            raise ValueError("threshold must be finite")
        if self.refractory_remaining < 0:
            raise ValueError("refractory_remaining must be >= 0")


class ProtocolError(RuntimeError):
    """Raised when a device is driven out of its operating protocol."""


# ---------------------------------------------------------------------------
# step neuron: preset to the hard axis, then let the synaptic current decide


@dataclass(frozen=True)
class StepNeuronConfig:
    magnet: MagnetParams
    eval_window: float = 5e-9  # must sit inside the preset relaxation time
    dt: float = 1e-12
    hard_axis: tuple = (1.0, 0.0, 0.0)
    preset_tolerance: float = 1e-3


def step_neuron_preset(cfg: StepNeuronConfig, n: int = 1) -> np.ndarray:
    """Magnetisations after the preset stage: every row along the hard axis."""
    h = np.asarray(cfg.hard_axis, dtype=float)
    if abs(h @ np.asarray(cfg.magnet.easy_axis)) > 1e-12:
        raise ValueError("hard axis must be orthogonal to the easy axis")
    return np.tile(h, (n, 1))


def step_neuron_evaluate(cfg: StepNeuronConfig, m: np.ndarray, i_syn: float, rng: RngStream | int,
                         ledger: EnergyLedger | None = None) -> np.ndarray:
    """Evaluate preset magnets (rows of ``m``) under synaptic charge current ``i_syn``.

    The MTJ's pinned-layer spin current pushes towards +easy for i_syn > 0.
    Returns a 0/1 array: 1 iff the magnet ends with m . easy > 0.
    """
    m = np.array(m, dtype=float).reshape(-1, 3)
    e = np.asarray(cfg.magnet.easy_axis)
    if np.any(np.abs(m @ e) > cfg.preset_tolerance):
        raise ProtocolError("step neuron evaluated without a preset (m . easy != 0)")
    rng = as_stream(rng)
    gens = [rng.child(k).generator() for k in range(len(m))]
    steps = n_steps_for(cfg.eval_window, cfg.dt)
    amps = np.full(steps, i_syn * cfg.magnet.polarization)
    hot = cfg.magnet.temperature > 0
    integrate_batch(cfg.magnet, m, amps, cfg.dt, gens if hot else None, tuple(e))
    if ledger is not None:
        ledger.charge("step_neuron", len(m))
    return (m @ e > 0).astype(np.int8)


# ---------------------------------------------------------------------------
# non-step neuron: DW position read out as an output current


def nonstep_transfer(i_in: float, state: DwDeviceState, gain: float,
                     schedule: TimestepSchedule = DW_SCHEDULE,
                     ledger: EnergyLedger | None = None) -> tuple[float, DwDeviceState]:
    """Write for one cycle, read I_out = gain (G - G_AP - G_DW), then reset to x = 0."""
    written = dw_advance(state, i_in, schedule.write)
    i_out = gain * (dw_conductance(written) - state.mtj.G_AP - state.G_DW)
    if ledger is not None and i_in != 0:
        ledger.charge("dw_write")
        ledger.charge("dw_reset")
    return i_out, written.at(0.0)


# ---------------------------------------------------------------------------
# integrate-and-fire DW neuron


def if_neuron_step(i_spike: float, state: DwDeviceState, leak_current: float = 0.0,
                   schedule: TimestepSchedule = DW_SCHEDULE,
                   ledger: EnergyLedger | None = None) -> tuple[bool, DwDeviceState]:
    """Integrate the input, retreat by the leak, fire and reset when the wall reaches L."""
    dx = (dw_velocity(state, i_spike) - dw_velocity(state, abs(leak_current))) * schedule.write
    moved = state.at(state.x + dx)
    if ledger is not None:
        if i_spike:
            ledger.charge("dw_write")
        if leak_current:
            ledger.charge("neuron_leak", 1, dw_write_energy(state, leak_current, schedule.write))
    fired = moved.x >= state.L * (1 - 1e-9)
    if fired:
        if ledger is not None:
            ledger.charge("dw_reset")
        moved = moved.at(0.0)
    return bool(fired), moved


class IFLayer:
    """Vectorised IF neurons; positions are kept as track fractions in [0, 1].

    ``theta`` scales the track length seen by each neuron (theta = 1 is the
    physical track), which is how homeostasis raises a neuron's threshold.
    """

    def __init__(self, n: int, device: DwDeviceState = DwDeviceState(),
                 schedule: TimestepSchedule = DW_SCHEDULE, leak_current: float = 0.0,
                 theta=1.0):
        self.n = n
        self.device = device
        self.schedule = schedule
        self.leak_current = float(leak_current)
        self.theta = np.broadcast_to(np.asarray(theta, dtype=float), (n,)).copy()
        self.x = np.zeros(n)

    def reset_state(self):
        self.x[:] = 0.0

    def displacement(self, currents: np.ndarray) -> np.ndarray:
        """Track-fraction displacement for one write cycle per unit theta."""
        d = self.device
        v = np.sign(currents) * np.minimum(d.mobility * np.abs(currents), d.v_sat)
        v_leak = min(d.mobility * abs(self.leak_current), d.v_sat)
        return (v - v_leak) * self.schedule.write / d.L

    def step(self, currents: np.ndarray, ledger: EnergyLedger | None = None) -> np.ndarray:
        self.x = np.clip(self.x + self.displacement(np.asarray(currents, dtype=float)) / self.theta,
                         0.0, 1.0)
        fired = self.x >= 1.0 - 1e-9
        self.x[fired] = 0.0
        if ledger is not None:
            active = int(np.count_nonzero(currents))
            if active:
                ledger.charge("dw_write", active)
            if self.leak_current:
                e = dw_write_energy(self.device, self.leak_current, self.schedule.write)
                ledger.charge("neuron_leak", self.n, e * self.n)
            ledger.charge("dw_reset", int(fired.sum()))
        return fired


# ---------------------------------------------------------------------------
# stochastic MTJ neuron


class Backend(str, Enum):
    MONTE_CARLO = "montecarlo"
    LOOKUP = "lookup"


@dataclass
class StochasticNeuronConfig:
    magnet: MagnetParams
    she: SheGeometry | None = None
    write_cycle: float = 0.5e-9
    dt: float = 1e-12
    curve: SwitchingCurve | None = None


class StochasticLayer:
    """Layer of stochastic MTJ neurons driven one write cycle per timestep.

    The Monte Carlo backend integrates every magnet through the cycle
    (starting from a thermalised state, carried across non-firing steps);
    the lookup backend samples the characterised switching curve.
    """

    def __init__(self, n: int, cfg: StochasticNeuronConfig, backend: Backend | str = Backend.LOOKUP,
                 rng: RngStream | int = 0):
        self.n = n
        self.cfg = cfg
        self.backend = Backend(backend)
        self.rng = as_stream(rng)
        if self.backend is Backend.LOOKUP:
            if cfg.curve is None:
                raise ValueError("lookup backend requires a characterised switching curve")
            self._gen = self.rng.named("lookup").generator()
        else:
            streams = [self.rng.child(k) for k in range(n)]
            self.m, self._gens = thermalized_batch(cfg.magnet, streams, cfg.dt)
            self._m_eq = self.m.copy()
            self._gain = spin_gain(cfg.magnet, cfg.she)
            self._steps = n_steps_for(cfg.write_cycle, cfg.dt)

    def probabilities(self, currents: np.ndarray) -> np.ndarray:
        return np.asarray(self.cfg.curve.probability(np.asarray(currents, dtype=float)))

    def step(self, currents: np.ndarray, ledger: EnergyLedger | None = None) -> np.ndarray:
        currents = np.broadcast_to(np.asarray(currents, dtype=float), (self.n,))
        if self.backend is Backend.LOOKUP:
            fired = self._gen.random(self.n) < self.probabilities(currents)
        else:
            fired = np.zeros(self.n, dtype=bool)
            e = np.asarray(self.cfg.magnet.easy_axis)
            axis = default_axis(self.cfg.magnet)
            for k in range(self.n):
                row = self.m[k:k + 1]
                integrate_batch(self.cfg.magnet, row, np.full(self._steps, currents[k] * self._gain),
                                self.cfg.dt, [self._gens[k]], axis)
                self.m[k] = row[0]
            fired = self.m @ e < 0
            # a fired magnet is reset to its thermalised starting state
            self.m[fired] = self._m_eq[fired]
        if ledger is not None:
            ledger.charge("neuron_write", self.n)
            ledger.charge("stochastic_read", self.n)
            ledger.charge("neuron_reset", int(fired.sum()))
        return fired


def stochastic_neuron_step(i_write: float, cfg: StochasticNeuronConfig, backend: Backend | str,
                           rng: RngStream | int, ledger: EnergyLedger | None = None) -> bool:
    """Single write cycle of a fresh (thermalised) stochastic neuron."""
    layer = StochasticLayer(1, cfg, backend, rng)
    return bool(layer.step(np.array([i_write]), ledger)[0])


# ---------------------------------------------------------------------------
# reference behavioural LIF


@dataclass(frozen=True)
class LifParams:
    R_mem: float = 1e6
    C_mem: float = 1e-12
    V_th: float = 0.1
    V_reset: float = 0.0
    refractory_steps: int = 0

    def __post_init__(self):
        if self.R_mem <= 0 or self.C_mem <= 0:
            raise ValueError("R_mem and C_mem must be positive")
        if self.refractory_steps < 0:
            raise ValueError("refractory_steps must be >= 0")

    @property
    def tau(self) -> float:
        return self.R_mem * self.C_mem


def reference_lif_step(p: LifParams, v_mem: float, i_in: float, dt: float,
                       refractory_remaining: int = 0) -> tuple[bool, float, int]:
    """Forward-Euler leaky integration; returns (spiked, V', refractory_remaining')."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if refractory_remaining > 0:
        return False, p.V_reset, refractory_remaining - 1
    v = v_mem + dt * (-v_mem / p.tau + i_in / p.C_mem)
    if v >= p.V_th:
        return True, p.V_reset, p.refractory_steps
    return False, v, 0


def lif_period(p: LifParams, i_in: float, dt: float = 0.0) -> float:
    """Analytic firing period under constant drive (math.inf below rheobase)."""
    v_inf = i_in * p.R_mem
    if v_inf <= p.V_th:
        return math.inf
    return p.tau * math.log((v_inf - p.V_reset) / (v_inf - p.V_th)) + p.refractory_steps * dt
