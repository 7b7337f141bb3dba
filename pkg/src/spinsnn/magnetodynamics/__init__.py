"""Stochastic macrospin solver and nanomagnet device primitives."""

from .core import (MagnetParams, MagnetizationState, PulseTrain, SheGeometry, SpinCurrent,
                   Trajectory, arrhenius_lifetime, default_axis, effective_field, energy_barrier,
                   integrate_batch, llg_step, magnetic_energy, n_steps_for, precession_frequency,
                   she_spin_current, simulate, spin_gain, thermal_field, thermal_sigma, tmr_ratio)
from .switching import (ExtrapolationError, SwitchingCurve, SwitchingResult, calibrate_anisotropy,
                        characterize, first_passage_times, sigmoid, switching_curve,
                        switching_probability, thermalized_batch)

__all__ = [name for name in dir() if not name.startswith("_")]
