"""Spike-timing plasticity rules and their programming-current realisation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .devices import DwDeviceState, dw_advance
from .magnetodynamics import SwitchingCurve
from .synapses import ProgrammingPulse


class StdpMode(str, Enum):
    ANALOG = "analog"
    PROBABILISTIC = "probabilistic"


@dataclass(frozen=True)
class StdpParams:
    """Exponential STDP window plus the programming-circuit constants.

    ``I0_plus``/``I0_minus`` are the programming currents at zero delay and
    ``t_prog`` the POST pulse width.  In probabilistic mode ``A_plus`` and
    ``A_minus`` are flip probabilities capped at ``p_max``.
    """

    A_plus: float = 0.01
    A_minus: float = 0.01
    tau_plus: float = 20e-6
    tau_minus: float = 20e-6
    mode: StdpMode = StdpMode.ANALOG
    p_max: float = 0.1
    t_prog: float = 1e-9
    negative_window_delay: float | None = None  # defaults to window_span * tau_minus
    window_span: float = 5.0
    I0_plus: float = 10.6e-6
    I0_minus: float = 10.6e-6

    def __post_init__(self):
        object.__setattr__(self, "mode", StdpMode(self.mode))
        if self.A_plus < 0 or self.A_minus < 0:
            raise ValueError("A_plus and A_minus must be non-negative")
        if self.tau_plus <= 0 or self.tau_minus <= 0:
            raise ValueError("STDP time constants must be positive")
        if not 0 < self.p_max <= 1:
            raise ValueError("p_max must lie in (0, 1]")
        if self.t_prog <= 0:
            raise ValueError("t_prog must be positive")
        if self.t_prog > min(self.tau_plus, self.tau_minus) / 100 * (1 + 1e-9):
            raise ValueError("t_prog must be at most 1/100 of the STDP time constants")
        if self.window_span <= 0:
            raise ValueError("window_span must be positive")
        if self.I0_plus < 0 or self.I0_minus < 0:
            raise ValueError("programming currents must be non-negative")
        if self.negative_window_delay is None:
            object.__setattr__(self, "negative_window_delay", self.window_span * self.tau_minus)
        elif self.negative_window_delay < 0:
            raise ValueError("negative_window_delay must be non-negative")

    @property
    def positive_window(self) -> float:
        return self.window_span * self.tau_plus

    @property
    def negative_window(self) -> float:
        return self.negative_window_delay


def stdp_delta(p: StdpParams, dt: float) -> float:
    """Weight change (or signed flip probability) for dt = t_post - t_pre; dt = 0 potentiates."""
    if dt >= 0:
        dw = p.A_plus * math.exp(-dt / p.tau_plus)
    else:
        dw = -p.A_minus * math.exp(dt / p.tau_minus)
    if p.mode is StdpMode.PROBABILISTIC:
        dw = math.copysign(min(abs(dw), p.p_max), dw)
    return dw


def stdp_curve(p: StdpParams, dts: Sequence[float]) -> list[tuple[float, float]]:
    return [(float(t), stdp_delta(p, t)) for t in dts]


def _check_window(p: StdpParams, dt: float):
    limit = p.positive_window if dt >= 0 else p.negative_window
    if abs(dt) > limit * (1 + 1e-12):
        raise ValueError(f"spike-time difference {dt} s outside the STDP window ({limit} s)")


def programming_current(p: StdpParams, dt: float) -> ProgrammingPulse:
    """Programming pulse of the subthreshold-biased STDP transistor at delay ``dt``."""
    _check_window(p, dt)
    if dt >= 0:
        return ProgrammingPulse(p.I0_plus * math.exp(-dt / p.tau_plus), p.t_prog)
    return ProgrammingPulse(-p.I0_minus * math.exp(dt / p.tau_minus), p.t_prog)


def stdp_gain(p: StdpParams, dw: DwDeviceState) -> float:
    """k = mu_DW t_prog (G_P - G_AP) / L: conductance change per ampere of programming current."""
    return dw.mobility * p.t_prog * dw.g_slope


def circuit_program(s: DwDeviceState, p: StdpParams, dt: float, n_sub: int = 32) -> DwDeviceState:
    """Apply the PRE/POST programming circuit to a DW synapse.

    The transistor gate keeps ramping while POST is high, so the current
    decays across the pulse; the pulse is integrated in ``n_sub`` slices.
    """
    _check_window(p, dt)
    h = p.t_prog / n_sub
    k = 1.0 if dt >= 0 else -1.0
    tau = p.tau_plus if dt >= 0 else p.tau_minus
    i0 = p.I0_plus if dt >= 0 else p.I0_minus
    for j in range(n_sub):
        # delay seen by the circuit at the slice midpoint
        lag = abs(dt) + (j + 0.5) * h
        s = dw_advance(s, k * i0 * math.exp(-lag / tau), h)
    return s


@dataclass(frozen=True)
class ScheduledPulse:
    time: float  # when the pulse is applied
    synapse: int
    delta_t: float  # t_post - t_pre
    pulse: ProgrammingPulse

    def __iter__(self):
        yield self.synapse
        yield self.pulse


def stdp_event_schedule(pre_spike_times: Sequence[Sequence[float]], post_spike_times: Sequence[float],
                        p: StdpParams, pairing: str = "last_pre") -> list[ScheduledPulse]:
    """Programming pulses for one post-neuron.

    Each post-spike potentiates every synapse through its latest preceding
    pre-spike inside the positive window.  Depression is sampled a
    ``negative_window_delay`` after the post-spike: with ``last_pre``
    pairing every pre-spike inside that window gets a pulse, with
    ``nearest`` only the first one.  Pulses are ordered by application
    time, then synapse index.
    """
    if pairing not in ("last_pre", "nearest"):
        raise ValueError(f"unknown pairing {pairing!r}")
    post = np.asarray(post_spike_times, dtype=float)
    if np.any(np.diff(post) < 0):
        raise ValueError("post-spike times must be sorted")
    events = []
    for syn, pre in enumerate(pre_spike_times):
        pre = np.asarray(pre, dtype=float)
        if np.any(np.diff(pre) < 0):
            raise ValueError(f"pre-spike times of synapse {syn} must be sorted")
        for t_post in post:
            k = int(np.searchsorted(pre, t_post, side="right"))
            if k:
                dt = t_post - pre[k - 1]
                if dt <= p.positive_window:
                    events.append(ScheduledPulse(t_post, syn, dt, programming_current(p, dt)))
            later = pre[k:]
            later = later[later - t_post <= p.negative_window]
            if pairing == "nearest":
                later = later[:1]
            for t_pre in later:
                dt = t_post - t_pre
                events.append(ScheduledPulse(t_post + p.negative_window, syn, dt,
                                             programming_current(p, dt)))
    events.sort(key=lambda e: (e.time, e.synapse, e.delta_t))
    return events


def probabilistic_pulse(p: StdpParams, dt: float, curve: SwitchingCurve) -> ProgrammingPulse:
    """Pulse whose characterised switching probability equals |stdp_delta| (<= p_max)."""
    if p.mode is not StdpMode.PROBABILISTIC:
        raise ValueError("probabilistic pulses need StdpParams(mode='probabilistic')")
    _check_window(p, dt)
    prob = abs(stdp_delta(p, dt))
    current = curve.current_for(prob)
    return ProgrammingPulse(math.copysign(current, stdp_delta(p, dt)), curve.pulse_width)


@dataclass(frozen=True)
class HomeostasisParams:
    theta_increment: float = 0.05
    theta_decay_tau: float = math.inf
    theta_floor: float = 1.0

    def __post_init__(self):
        if self.theta_increment < 0:
            raise ValueError("theta_increment must be non-negative")
        if self.theta_decay_tau <= 0:
            raise ValueError("theta_decay_tau must be positive")


def homeostasis_update(theta, spiked, dt: float, p: HomeostasisParams):
    """theta' = max(floor, theta exp(-dt/tau) + increment * spiked); works elementwise."""
    decay = math.exp(-dt / p.theta_decay_tau)
    out = np.maximum(p.theta_floor, np.asarray(theta, dtype=float) * decay
                     + p.theta_increment * np.asarray(spiked, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LateralInhibition:
    """On a layer spike, silence the other neurons for the rest of the timestep
    and push their walls back by ``displacement`` (track fraction)."""

    enabled: bool = True
    displacement: float = 1.0

    def apply(self, x: np.ndarray, fired: np.ndarray) -> np.ndarray:
        if not self.enabled or not fired.any():
            return x
        out = x.copy()
        others = ~fired
        out[others] = np.maximum(out[others] - self.displacement, 0.0)
        return out


STDP_HEADER = ("delta_t_s", "delta_w")
STDP_PROB_HEADER = ("delta_t_s", "p_flip")
