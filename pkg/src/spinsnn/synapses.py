"""Synapse devices: multi-bit DW, binary stochastic MTJ and volatile (STP/LTP) MTJ."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .devices import (DwDeviceState, MtjParams, MtjState, dw_advance, mtj_conductance)
from .magnetodynamics import (MagnetParams, MagnetizationState, PulseTrain, SwitchingCurve,
                              default_axis, integrate_batch, n_steps_for, thermalized_batch)
from .magnetodynamics.presets import VOLATILE_DT, VOLATILE_PRESET
from .rng import RngStream, as_stream

MAX_READ_VOLTAGE = 0.1
SETTLE_TIME = 5e-9


class SynapseConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProgrammingPulse:
    current: float
    duration: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"pulse duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class MultibitSynapse:
    dw: DwDeviceState = DwDeviceState()
    last_pre_spike_time: float | None = None


@dataclass(frozen=True)
class BinarySynapse:
    """Single-bit MTJ; P is logical weight 1, AP is 0."""

    state: MtjState = MtjState.AP
    curve: SwitchingCurve | None = None
    mtj: MtjParams = MtjParams()
    p_max: float = 0.1
    last_pre_spike_time: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "state", MtjState(self.state))

    @property
    def weight(self) -> int:
        return int(self.state is MtjState.P)


@dataclass(frozen=True)
class VolatileSynapse:
    m: MagnetizationState
    magnet: MagnetParams = VOLATILE_PRESET
    mtj: MtjParams = MtjParams()
    last_pre_spike_time: float | None = None

    @classmethod
    def fresh(cls, magnet: MagnetParams = VOLATILE_PRESET, **kw) -> "VolatileSynapse":
        return cls(MagnetizationState(magnet.easy_axis), magnet, **kw)

    @property
    def alignment(self) -> float:
        return float(self.m.m @ np.asarray(self.magnet.easy_axis))


SynapseState = Union[MultibitSynapse, BinarySynapse, VolatileSynapse]


def synapse_conductance(s: SynapseState, v: float = 0.0) -> float:
    if isinstance(s, MultibitSynapse):
        d = s.dw
        # P region is bias-independent, the AP region rolls off with |V|
        g_ap = mtj_conductance(d.mtj, MtjState.AP, v)
        return d.mtj.G_P * d.fraction + g_ap * (1 - d.fraction) + d.G_DW
    if isinstance(s, BinarySynapse):
        return mtj_conductance(s.mtj, s.state, v)
    if isinstance(s, VolatileSynapse):
        # the free layer is referenced to a pinned layer antiparallel to +easy
        g_ap = mtj_conductance(s.mtj, MtjState.AP, v)
        cos = -s.alignment
        return g_ap + (s.mtj.G_P - g_ap) * (1 + cos) / 2
    raise TypeError(f"not a synapse state: {type(s).__name__}")


def synapse_read_current(s: SynapseState, v_spike: float) -> float:
    """Read current through the synapse; a pure query, the state never changes."""
    if abs(v_spike) > MAX_READ_VOLTAGE:
        warnings.warn(f"read voltage {v_spike} V exceeds {MAX_READ_VOLTAGE} V; "
                      "AP roll-off compresses the weight ratio", stacklevel=2)
    return synapse_conductance(s, v_spike) * v_spike


def program_multibit(s: MultibitSynapse, pulse: ProgrammingPulse) -> MultibitSynapse:
    if pulse.current == 0:
        return s
    return replace(s, dw=dw_advance(s.dw, pulse.current, pulse.duration))


def binary_flip_probability(s: BinarySynapse, pulse: ProgrammingPulse) -> float:
    """Switching probability of the characterised curve for |pulse current|.

    Currents below the characterised floor are bounded by the floor
    probability (the curve is monotone), so a weak pulse is not an error.
    """
    if s.curve is None:
        raise SynapseConfigError("binary synapse has no characterised switching curve")
    if abs(pulse.duration - s.curve.pulse_width) > 1e-6 * s.curve.pulse_width:
        raise SynapseConfigError(
            f"pulse width {pulse.duration} s differs from characterised {s.curve.pulse_width} s")
    lo, _ = s.curve.range
    prob = float(s.curve.probability(max(abs(pulse.current), lo)))
    if prob > s.p_max + 1e-12:
        raise SynapseConfigError(
            f"pulse {pulse.current} A gives flip probability {prob:.4g} > p_max = {s.p_max}")
    return prob


def program_binary_stochastic(s: BinarySynapse, pulse: ProgrammingPulse,
                              rng: RngStream | int | np.random.Generator) -> BinarySynapse:
    """Positive pulses try AP -> P, negative pulses P -> AP; success follows the curve."""
    target = MtjState.P if pulse.current > 0 else MtjState.AP
    if pulse.current == 0 or s.state is target:
        return s
    prob = binary_flip_probability(s, pulse)
    gen = rng if isinstance(rng, np.random.Generator) else as_stream(rng).generator()
    if gen.random() < prob:
        return replace(s, state=target)
    return s


def volatile_switching(magnet: MagnetParams, train: PulseTrain, n_trials: int, dt: float,
                       rng: RngStream | int, settle: float = SETTLE_TIME) -> np.ndarray:
    """Boolean per trial: thermalised +easy magnet ends reversed after the train and settle."""
    rng = as_stream(rng)
    streams = [rng.child(k) for k in range(n_trials)]
    m, gens = thermalized_batch(magnet, streams, dt)
    span = train.total_span + settle
    amps = train.sample(dt, n_steps_for(span, dt)) * magnet.polarization
    hot = magnet.temperature > 0
    integrate_batch(magnet, m, amps, dt, gens if hot else None, default_axis(magnet))
    return m @ np.asarray(magnet.easy_axis) < 0


def volatile_stimulate(s: VolatileSynapse, train: PulseTrain, dt: float = VOLATILE_DT,
                       rng: RngStream | int = 0, settle: float = SETTLE_TIME
                       ) -> tuple[bool, VolatileSynapse]:
    """Drive one synapse through ``train``; switched iff reversed after the settle window."""
    e = np.asarray(s.magnet.easy_axis)
    m = np.array(s.m.m, dtype=float).reshape(1, 3)
    start_sign = np.sign(m[0] @ e) or 1.0
    span = train.total_span + settle
    amps = train.sample(dt, n_steps_for(span, dt)) * s.magnet.polarization
    hot = s.magnet.temperature > 0
    gens = [as_stream(rng).generator()] if hot else None
    # current drives away from whichever easy direction the magnet sits in
    integrate_batch(s.magnet, m, amps, dt, gens, tuple(-start_sign * e))
    after = replace(s, m=MagnetizationState(m[0], s.m.t + span))
    return bool(np.sign(m[0] @ e) != start_sign), after


def stp_ltp_train(amplitude: float, interval: float, n_pulses: int = 5,
                  width: float = 1e-9) -> PulseTrain:
    return PulseTrain.repeated(n_pulses, width, interval, amplitude)


@dataclass(frozen=True)
class IntervalPoint:
    interval: float
    probability: float
    stderr: float
    n_trials: int


def interval_sweep(magnet: MagnetParams, amplitude: float, intervals: Sequence[float],
                   n_trials: int, dt: float, rng: RngStream | int, n_pulses: int = 5,
                   width: float = 1e-9) -> list[IntervalPoint]:
    """Switching probability against inter-pulse interval (PPF/PTP-style measurement)."""
    rng = as_stream(rng)
    out = []
    for k, gap in enumerate(intervals):
        hits = volatile_switching(magnet, stp_ltp_train(amplitude, gap, n_pulses, width),
                                  n_trials, dt, rng.child(k))
        prob = float(hits.mean())
        out.append(IntervalPoint(float(gap), prob, float(np.sqrt(prob * (1 - prob) / n_trials)),
                                 n_trials))
    return out


@dataclass(frozen=True)
class VolatileCalibration:
    amplitude: float
    p_fast: float
    p_slow: float
    margin: float


def calibrate_volatile_amplitude(magnet: MagnetParams, amplitudes: Sequence[float],
                                 n_trials: int, dt: float, rng: RngStream | int,
                                 fast: float = 3e-9, slow: float = 6e-9,
                                 p_ltp: float = 0.9, p_stp: float = 0.1) -> VolatileCalibration:
    """Pick the amplitude that best separates LTP at ``fast`` from STP at ``slow`` spacing.

    The score is min(P_fast - p_ltp, p_stp - P_slow); the same trial streams
    are reused across amplitudes.
    """
    rng = as_stream(rng)
    best = None
    for amp in amplitudes:
        p_fast = float(volatile_switching(magnet, stp_ltp_train(amp, fast), n_trials, dt,
                                          rng.named("fast")).mean())
        p_slow = float(volatile_switching(magnet, stp_ltp_train(amp, slow), n_trials, dt,
                                          rng.named("slow")).mean())
        cand = VolatileCalibration(float(amp), p_fast, p_slow, min(p_fast - p_ltp, p_stp - p_slow))
        if best is None or cand.margin > best.margin:
            best = cand
    return best


INTERVAL_HEADER = ("interval_s", "probability", "stderr", "n_trials")
