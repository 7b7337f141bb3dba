"""Macrospin dynamics: nanomagnet parameters, LLG stepping and device primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..constants import GAMMA, K_B, MU0, MU_B, Q
from ..rng import RngStream, as_stream
from . import _kernel


def _unit(v, name: str, tol: float = 1e-12) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(3)
    if abs(np.linalg.norm(arr) - 1.0) > tol:
        raise ValueError(f"{name} must be a unit vector, |{name}| = {np.linalg.norm(arr)!r}")
    return arr


@dataclass(frozen=True)
class MagnetParams:
    """Physical description of a single-domain nanomagnet.

    ``Ku2`` is the effective uniaxial anisotropy along ``easy_axis`` and
    ``demag`` the ellipsoid demagnetising factors.  ``polarization`` sets the
    spin current injected by a pinned layer, I_s = P * I_q.
    """

    Ms: float
    Ku2: float
    volume: float
    alpha: float
    easy_axis: tuple = (0.0, 0.0, 1.0)
    demag: tuple = (0.0, 0.0, 0.0)
    temperature: float = 300.0
    polarization: float = 0.5

    def __post_init__(self):
        if self.Ms <= 0:
            raise ValueError(f"Ms must be positive, got {self.Ms}")
        if self.volume <= 0:
            raise ValueError(f"volume must be positive, got {self.volume}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.Ku2 < 0:
            raise ValueError(f"Ku2 must be non-negative, got {self.Ku2}")
        object.__setattr__(self, "easy_axis", tuple(_unit(self.easy_axis, "easy_axis")))
        n = tuple(float(x) for x in self.demag)
        if len(n) != 3 or min(n) < 0 or sum(n) > 1 + 1e-9:
            raise ValueError(f"demag factors must be >= 0 with sum <= 1, got {n}")
        object.__setattr__(self, "demag", n)
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 <= self.polarization <= 1:
            raise ValueError(f"polarization must be in [0, 1], got {self.polarization}")

    @property
    def n_spins(self) -> float:
        return self.Ms * self.volume / MU_B

    @property
    def anisotropy_field(self) -> float:
        return 2.0 * self.Ku2 / (MU0 * self.Ms)

    @property
    def barrier_kT(self) -> float:
        """Barrier height in units of k_B T (inf at zero temperature)."""
        if self.temperature == 0:
            return math.inf
        return energy_barrier(self) / (K_B * self.temperature)

    def replace(self, **changes) -> "MagnetParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class MagnetizationState:
    m: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(3)
        if abs(np.linalg.norm(m) - 1.0) > 1e-9:
            raise ValueError(f"magnetization must be a unit vector, |m| = {np.linalg.norm(m)!r}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)


@dataclass(frozen=True)
class SpinCurrent:
    magnitude: float
    axis: tuple = (0.0, 0.0, -1.0)

    def __post_init__(self):
        object.__setattr__(self, "axis", tuple(_unit(self.axis, "axis")))

    @property
    def vector(self) -> np.ndarray:
        return self.magnitude * np.asarray(self.axis)


@dataclass(frozen=True)
class SheGeometry:
    """Heavy-metal underlayer converting a charge current into a spin current."""

    theta_sh: float
    w_fm: float
    t_hm: float

    def __post_init__(self):
        if self.t_hm <= 0 or self.w_fm <= 0:
            raise ValueError("heavy-metal thickness and magnet width must be positive")
        if not 0 < self.theta_sh < 1:
            raise ValueError(f"spin-Hall angle must lie in (0, 1), got {self.theta_sh}")

    @property
    def gain(self) -> float:
        return she_spin_current(1.0, self.theta_sh, self.w_fm, self.t_hm)


@dataclass(frozen=True)
class PulseTrain:
    """Piecewise-constant charge-current drive: (start [s], duration [s], current [A])."""

    segments: tuple = ()
    total_span: float | None = None

    def __post_init__(self):
        segs = tuple(sorted((float(a), float(d), float(i)) for a, d, i in self.segments))
        end = -math.inf
        for start, dur, _ in segs:
            if dur <= 0:
                raise ValueError(f"pulse durations must be positive, got {dur}")
            if start < end - 1e-18:
                raise ValueError("pulse segments overlap")
            end = start + dur
        object.__setattr__(self, "segments", segs)
        span = max([s + d for s, d, _ in segs], default=0.0)
        if self.total_span is None:
            object.__setattr__(self, "total_span", span)
        elif self.total_span < span:
            raise ValueError("total_span shorter than the last pulse")

    @classmethod
    def repeated(cls, n_pulses: int, width: float, interval: float, current: float,
                 start: float = 0.0, tail: float = 0.0) -> "PulseTrain":
        """``n_pulses`` identical pulses separated by ``interval`` of zero drive."""
        segs = [(start + k * (width + interval), width, current) for k in range(n_pulses)]
        span = (segs[-1][0] + width if segs else start) + tail
        return cls(tuple(segs), span)

    def sample(self, dt: float, n_steps: int | None = None) -> np.ndarray:
        """Current in each integration step, evaluated at the step midpoint."""
        if n_steps is None:
            n_steps = n_steps_for(self.total_span, dt)
        mid = (np.arange(n_steps) + 0.5) * dt
        out = np.zeros(n_steps)
        for start, dur, cur in self.segments:
            out[(mid >= start) & (mid < start + dur)] = cur
        return out


def n_steps_for(duration: float, dt: float) -> int:
    return int(round(duration / dt))


# ---------------------------------------------------------------------------
# device-physics primitives


def energy_barrier(p: MagnetParams) -> float:
    return p.Ku2 * p.volume


def arrhenius_lifetime(barrier_kT: float, attempt_time: float = 1e-9) -> float:
    return attempt_time * math.exp(barrier_kT)


def tmr_ratio(r_ap: float, r_p: float) -> float:
    """Tunnelling magnetoresistance in percent."""
    if r_p <= 0:
        raise ValueError(f"R_P must be positive, got {r_p}")
    if r_ap < r_p:
        raise ValueError(f"R_AP ({r_ap}) must not be below R_P ({r_p})")
    return (r_ap - r_p) / r_p * 100.0


def she_spin_current(i_q: float, theta_sh: float, w_fm: float, t_hm: float) -> float:
    if t_hm <= 0:
        raise ValueError(f"heavy-metal thickness must be positive, got {t_hm}")
    if w_fm <= 0:
        raise ValueError(f"magnet width must be positive, got {w_fm}")
    return theta_sh * (w_fm / t_hm) * i_q


def effective_field(p: MagnetParams, m, h_ext=None) -> np.ndarray:
    """Uniaxial + demagnetising + external field [A/m] (thermal field excluded)."""
    m = np.asarray(m, dtype=float)
    e = np.asarray(p.easy_axis)
    h = p.anisotropy_field * np.dot(m, e) * e - p.Ms * np.asarray(p.demag) * m
    if h_ext is not None:
        h = h + np.asarray(h_ext, dtype=float)
    return h


def magnetic_energy(p: MagnetParams, m, h_ext=None) -> float:
    """Anisotropy + demagnetising + Zeeman energy [J] (anisotropy zero at the hard plane)."""
    m = np.asarray(m, dtype=float)
    e = np.asarray(p.easy_axis)
    energy = -p.Ku2 * p.volume * np.dot(m, e) ** 2
    energy += 0.5 * MU0 * p.Ms ** 2 * p.volume * np.dot(np.asarray(p.demag), m * m)
    if h_ext is not None:
        energy -= MU0 * p.Ms * p.volume * np.dot(m, np.asarray(h_ext, dtype=float))
    return float(energy)


def precession_frequency(p: MagnetParams, h_magnitude: float) -> float:
    """Small-angle precession frequency [Hz] about a field of the given magnitude."""
    return GAMMA * h_magnitude / (2 * math.pi * (1 + p.alpha ** 2))


def thermal_sigma(p: MagnetParams, dt: float) -> float:
    """Standard deviation [A/m] of each thermal-field component for step ``dt``."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if p.temperature == 0:
        return 0.0
    a = p.alpha
    return math.sqrt(a / (1 + a * a) * 2 * K_B * p.temperature / (GAMMA * MU0 * p.Ms * p.volume * dt))


def thermal_field(p: MagnetParams, dt: float, gen: np.random.Generator) -> np.ndarray:
    """One fresh thermal-field draw; consumes three normals from ``gen`` when T > 0."""
    sigma = thermal_sigma(p, dt)
    if sigma == 0.0:
        return np.zeros(3)
    return sigma * gen.standard_normal(3)


# ---------------------------------------------------------------------------
# integration


@dataclass
class _Coefficients:
    easy: np.ndarray
    demag: np.ndarray
    hk: float
    g: float
    alpha: float
    c: float

    @classmethod
    def of(cls, p: MagnetParams) -> "_Coefficients":
        a = p.alpha
        return cls(
            easy=np.asarray(p.easy_axis, dtype=float),
            demag=p.Ms * np.asarray(p.demag, dtype=float),
            hk=p.anisotropy_field,
            g=GAMMA / (1 + a * a),
            alpha=a,
            c=1.0 / (Q * p.n_spins * (1 + a * a)),
        )


_NO_CROSS = np.empty(0, dtype=np.int64)


def _draw(gens: Sequence[np.random.Generator], n_steps: int) -> np.ndarray:
    noise = np.empty((len(gens), n_steps, 3))
    for row, gen in enumerate(gens):
        noise[row] = gen.standard_normal((n_steps, 3))
    return noise


def integrate_batch(p: MagnetParams, m: np.ndarray, spin_amps: np.ndarray, dt: float,
                    gens: Sequence[np.random.Generator] | None, axis,
                    h_ext=None, first_cross: np.ndarray | None = None,
                    step0: int = 0, stop_on_cross: bool = False, chunk: int = 1024) -> np.ndarray:
    """Advance a batch of magnets (rows of ``m``) in place.

    ``spin_amps`` is the spin-current magnitude [A] per step, shared by the
    batch.  Row ``i`` draws its thermal field from ``gens[i]``, three normals
    per step, so a row's trajectory does not depend on which batch it ran in.
    """
    coef = _Coefficients.of(p)
    sigma = thermal_sigma(p, dt)
    axis = np.asarray(axis, dtype=float)
    hext = np.zeros(3) if h_ext is None else np.asarray(h_ext, dtype=float).reshape(3)
    spin_amps = np.ascontiguousarray(spin_amps, dtype=float)
    n = m.shape[0]
    cross = _NO_CROSS if first_cross is None else first_cross
    empty_noise = np.empty((n, 0, 3))
    for start in range(0, len(spin_amps), chunk):
        seg = spin_amps[start:start + chunk]
        if sigma > 0:
            if gens is None or len(gens) != n:
                raise ValueError("a generator per row is required at non-zero temperature")
            noise = _draw(gens, len(seg))
        else:
            noise = empty_noise
        _kernel.integrate(m, noise, sigma, seg, axis, coef.easy, coef.demag, hext,
                          coef.hk, coef.g, coef.alpha, coef.c, dt, cross,
                          step0 + start, stop_on_cross)
    return m


def default_axis(p: MagnetParams) -> tuple:
    """Spin polarisation that drives the magnet away from +easy_axis."""
    return tuple(-np.asarray(p.easy_axis))


def spin_gain(p: MagnetParams, she: SheGeometry | None = None) -> float:
    """Spin current per unit charge current: spin-Hall gain, or P for a pinned layer."""
    return she.gain if she is not None else p.polarization


def llg_step(p: MagnetParams, state: MagnetizationState, spin: SpinCurrent | None, dt: float,
             gen: np.random.Generator | None = None, h_ext=None) -> MagnetizationState:
    """One stochastic Heun step; returns the renormalised state at t + dt."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    spin = spin or SpinCurrent(0.0)
    m = np.array(state.m, dtype=float).reshape(1, 3)
    sigma = thermal_sigma(p, dt)
    if sigma > 0 and gen is None:
        raise ValueError("a generator is required at non-zero temperature")
    gens = [gen] if sigma > 0 else None
    integrate_batch(p, m, np.array([spin.magnitude]), dt, gens, spin.axis, h_ext=h_ext)
    return MagnetizationState(m[0], state.t + dt)


@dataclass
class Trajectory:
    t: np.ndarray
    m: np.ndarray
    final: MagnetizationState = field(repr=False)

    def rows(self):
        for t, m in zip(self.t, self.m):
            yield (t, m[0], m[1], m[2])


def simulate(p: MagnetParams, m0, drive: PulseTrain, dt: float, rng: RngStream | int,
             she: SheGeometry | None = None, axis=None, h_ext=None, stride: int = 1,
             duration: float | None = None, t0: float = 0.0) -> Trajectory:
    """Integrate one magnet through a charge-current pulse train.

    Samples every ``stride`` steps (plus the initial state).  The drive is
    converted to spin current through ``she`` when given, else the pinned-layer
    polarisation.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n_steps = n_steps_for(drive.total_span if duration is None else duration, dt)
    amps = drive.sample(dt, n_steps) * spin_gain(p, she)
    axis = default_axis(p) if axis is None else axis
    gen = as_stream(rng).generator()
    gens = [gen] if thermal_sigma(p, dt) > 0 else None
    m = np.array(MagnetizationState(m0).m, dtype=float).reshape(1, 3)

    ts = [t0]
    ms = [m[0].copy()]
    for start in range(0, n_steps, stride):
        seg = amps[start:start + stride]
        integrate_batch(p, m, seg, dt, gens, axis, h_ext=h_ext, chunk=max(len(seg), 1))
        ts.append(t0 + (start + len(seg)) * dt)
        ms.append(m[0].copy())
    final = MagnetizationState(m[0], t0 + n_steps * dt)
    return Trajectory(np.asarray(ts), np.asarray(ms), final)
