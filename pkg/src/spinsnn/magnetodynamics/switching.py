"""Monte Carlo switching characterisation of a stochastic nanomagnet."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import curve_fit

from ..parallel import pmap
from ..rng import RngStream, as_stream
from .core import (MagnetParams, SheGeometry, default_axis, integrate_batch, n_steps_for,
                   spin_gain, thermal_sigma)

THERMALIZATION_TIME = 5e-9
BATCH = 1024


class ExtrapolationError(ValueError):
    """Raised when a lookup is requested outside the characterised range."""


@dataclass(frozen=True)
class SwitchingResult:
    current: float
    width: float
    probability: float
    stderr: float
    n_trials: int
    n_switched: int


def _result(current, width, n_switched, n_trials) -> SwitchingResult:
    prob = float(n_switched / n_trials)
    stderr = math.sqrt(prob * (1 - prob) / n_trials)
    return SwitchingResult(float(current), float(width), prob, stderr, int(n_trials), int(n_switched))


def _start_states(p: MagnetParams, n: int) -> np.ndarray:
    return np.tile(np.asarray(p.easy_axis, dtype=float), (n, 1))


def thermalized_batch(p: MagnetParams, trial_streams: Sequence[RngStream], dt: float,
                      window: float = THERMALIZATION_TIME):
    """Relax magnets from +easy_axis at zero drive; returns (m, generators)."""
    gens = [s.generator() for s in trial_streams]
    m = _start_states(p, len(gens))
    steps = n_steps_for(window, dt)
    if steps and thermal_sigma(p, dt) > 0:
        integrate_batch(p, m, np.zeros(steps), dt, gens, default_axis(p))
    return m, gens


def switching_curve(p: MagnetParams, currents: Sequence[float], pulse_width: float, n_trials: int,
                    dt: float, rng: RngStream | int, she: SheGeometry | None = None,
                    axis=None, thermalize: float = THERMALIZATION_TIME) -> list[SwitchingResult]:
    """Switching probability at every current of ``currents``.

    Trial ``k`` uses the same noise stream at every current (common random
    numbers), so its zero-drive thermalisation is computed once and replayed;
    this is bit-identical to recomputing it per current.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    rng = as_stream(rng)
    axis = default_axis(p) if axis is None else axis
    gain = spin_gain(p, she)
    steps = n_steps_for(pulse_width, dt)
    e = np.asarray(p.easy_axis)
    hot = thermal_sigma(p, dt) > 0

    def block(lo):
        out = np.zeros(len(currents), dtype=np.int64)
        streams = [rng.child(k) for k in range(lo, min(lo + BATCH, n_trials))]
        m_eq, gens = thermalized_batch(p, streams, dt, thermalize)
        saved = [g.bit_generator.state for g in gens] if hot else None
        for idx, current in enumerate(currents):
            if hot:
                for g, st in zip(gens, saved):
                    g.bit_generator.state = st
            m = m_eq.copy()
            integrate_batch(p, m, np.full(steps, current * gain), dt, gens if hot else None, axis)
            out[idx] = np.count_nonzero(m @ e < 0)
        return out

    switched = np.sum(pmap(block, range(0, n_trials, BATCH)), axis=0)
    return [_result(c, pulse_width, s, n_trials) for c, s in zip(currents, switched)]


def switching_probability(p: MagnetParams, pulse_current: float, pulse_width: float, n_trials: int,
                          dt: float, rng: RngStream | int, she: SheGeometry | None = None,
                          axis=None, thermalize: float = THERMALIZATION_TIME) -> SwitchingResult:
    """Fraction of thermalised trials reversed (m . easy < 0) at the end of one pulse."""
    return switching_curve(p, [pulse_current], pulse_width, n_trials, dt, rng, she, axis, thermalize)[0]


def first_passage_times(p: MagnetParams, n_trials: int, dt: float, rng: RngStream | int,
                        max_time: float, chunk_time: float | None = None) -> np.ndarray:
    """Time for each trial started at +easy_axis to first reach m . easy < 0 (nan if never)."""
    rng = as_stream(rng)
    max_steps = n_steps_for(max_time, dt)
    chunk = max(1, n_steps_for(chunk_time, dt)) if chunk_time else 4096
    out = np.full(n_trials, np.nan)

    def block(lo):
        idx = np.arange(lo, min(lo + BATCH, n_trials))
        gens = [rng.child(int(k)).generator() for k in idx]
        m = _start_states(p, len(idx))
        cross = np.full(len(idx), -1, dtype=np.int64)
        active = np.arange(len(idx))
        done = 0
        while done < max_steps and len(active):
            n = min(chunk, max_steps - done)
            sub_m = m[active]
            sub_cross = cross[active]
            integrate_batch(p, sub_m, np.zeros(n), dt, [gens[i] for i in active], default_axis(p),
                            first_cross=sub_cross, step0=done, stop_on_cross=True, chunk=n)
            m[active] = sub_m
            cross[active] = sub_cross
            active = active[sub_cross < 0]
            done += n
        hit = cross >= 0
        out[idx[hit]] = (cross[hit] + 1) * dt

    pmap(block, range(0, n_trials, BATCH))
    return out


# ---------------------------------------------------------------------------
# fitted curve and lookup table


def sigmoid(i, i50, width):
    return 1.0 / (1.0 + np.exp(-(np.asarray(i) - i50) / width))


@dataclass
class SwitchingCurve:
    """Characterised probability-vs-current grid for one pulse width.

    Lookups interpolate linearly between grid points and refuse to
    extrapolate; the sigmoid fit is kept for reporting and inversion.
    """

    currents: np.ndarray
    probabilities: np.ndarray
    stderr: np.ndarray
    pulse_width: float
    n_trials: int

    def __post_init__(self):
        self.currents = np.asarray(self.currents, dtype=float)
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if np.any(np.diff(self.currents) <= 0):
            raise ValueError("characterisation currents must be strictly increasing")
        self._fit = None

    @classmethod
    def from_results(cls, results: Sequence[SwitchingResult]) -> "SwitchingCurve":
        return cls(
            currents=[r.current for r in results],
            probabilities=[r.probability for r in results],
            stderr=[r.stderr for r in results],
            pulse_width=results[0].width,
            n_trials=results[0].n_trials,
        )

    @property
    def range(self) -> tuple[float, float]:
        return float(self.currents[0]), float(self.currents[-1])

    def probability(self, current) -> np.ndarray | float:
        c = np.asarray(current, dtype=float)
        lo, hi = self.range
        span = hi - lo
        if np.any(c < lo - 1e-12 * span) or np.any(c > hi + 1e-12 * span):
            raise ExtrapolationError(
                f"current outside characterised range [{lo:.6g}, {hi:.6g}] A")
        out = np.interp(c, self.currents, self._monotone())
        return float(out) if out.ndim == 0 else out

    def _monotone(self) -> np.ndarray:
        # Monte Carlo noise can make the raw grid dip; interpolation uses the running max
        return np.maximum.accumulate(self.probabilities)

    def current_for(self, probability: float) -> float:
        """Smallest current whose interpolated probability reaches ``probability``."""
        probs = self._monotone()
        if not probs[0] <= probability <= probs[-1]:
            raise ExtrapolationError(
                f"probability {probability} outside characterised range [{probs[0]}, {probs[-1]}]")
        k = int(np.searchsorted(probs, probability, side="left"))
        if k == 0:
            return float(self.currents[0])
        p0, p1 = probs[k - 1], probs[k]
        c0, c1 = self.currents[k - 1], self.currents[k]
        return float(c0 + (probability - p0) / (p1 - p0) * (c1 - c0))

    def fit(self) -> tuple[float, float, float]:
        """Least-squares sigmoid fit; returns (I50, width, R^2)."""
        if self._fit is None:
            c, prob = self.currents, self.probabilities
            guess_i50 = c[np.argmin(np.abs(prob - 0.5))]
            guess_w = max((c[-1] - c[0]) / 10, 1e-12)
            (i50, w), _ = curve_fit(sigmoid, c, prob, p0=(guess_i50, guess_w), maxfev=20000)
            resid = prob - sigmoid(c, i50, w)
            ss_tot = np.sum((prob - prob.mean()) ** 2)
            r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
            self._fit = (float(i50), float(abs(w)), float(r2))
        return self._fit


def characterize(p: MagnetParams, currents: Sequence[float], pulse_width: float, n_trials: int,
                 dt: float, rng: RngStream | int, she: SheGeometry | None = None) -> SwitchingCurve:
    return SwitchingCurve.from_results(switching_curve(p, currents, pulse_width, n_trials, dt, rng, she))


def calibrate_anisotropy(p: MagnetParams, target_current: float, pulse_width: float, dt: float,
                         rng: RngStream | int, she: SheGeometry | None = None,
                         target_probability: float = 0.5, n_trials: int = 2000,
                         bracket: tuple[float, float] | None = None, tol: float = 1e-3,
                         max_iter: int = 40) -> MagnetParams:
    """Tune Ku2 so that P(target_current, pulse_width) = target_probability.

    Switching probability falls as the anisotropy rises, so bisection on Ku2
    with a fixed noise stream (common random numbers) converges.
    """
    lo, hi = bracket if bracket is not None else (0.25 * p.Ku2, 4.0 * p.Ku2)

    def prob(ku2):
        return switching_probability(p.replace(Ku2=ku2), target_current, pulse_width,
                                     n_trials, dt, rng, she).probability

    if prob(lo) < target_probability or prob(hi) > target_probability:
        raise ValueError(f"Ku2 bracket [{lo}, {hi}] does not contain the target probability")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if prob(mid) > target_probability:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * mid:
            break
    return p.replace(Ku2=0.5 * (lo + hi))


TRAJECTORY_HEADER = ("t_s", "m_x", "m_y", "m_z")
SWITCHING_HEADER = ("current_A", "width_s", "probability", "stderr")


def switching_rows(results: Sequence[SwitchingResult]):
    return [(r.current, r.width, r.probability, r.stderr) for r in results]
