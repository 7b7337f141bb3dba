"""Behavioural electrical models: MTJ conductance, 1-D domain-wall device, lateral spin valve."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

# calibration point of the DW device: full 80 nm traversal by 10.6 uA in 2 ns
DW_TRACK_LENGTH = 80e-9
DW_WIDTH = 20e-9
DW_CAL_CURRENT = 10.6e-6
DW_CAL_TIME = 2e-9
DW_PAIR_ENERGY = 0.1e-15  # write + reset at the calibration point
DW_MOBILITY = DW_TRACK_LENGTH / (DW_CAL_CURRENT * DW_CAL_TIME)
# write and reset are two calibration-current events of DW_CAL_TIME each
DW_HM_RESISTANCE = DW_PAIR_ENERGY / (2 * DW_CAL_CURRENT ** 2 * DW_CAL_TIME)


class MtjState(str, Enum):
    P = "P"
    AP = "AP"


@dataclass(frozen=True)
class MtjParams:
    G_P: float = 1e-6
    G_AP: float = 1e-6 / 3.0  # TMR = 200 %
    V_h: float = 0.5
    oxide_area: float | None = None
    oxide_thickness: float | None = None

    def __post_init__(self):
        if not self.G_P > self.G_AP > 0:
            raise ValueError(f"need G_P > G_AP > 0, got G_P={self.G_P}, G_AP={self.G_AP}")
        if self.V_h <= 0:
            raise ValueError(f"V_h must be positive, got {self.V_h}")

    @property
    def tmr0(self) -> float:
        """Zero-bias TMR as a fraction."""
        return self.G_P / self.G_AP - 1.0


def mtj_conductance(p: MtjParams, state: MtjState | str, v_applied: float = 0.0) -> float:
    """Conductance with bias roll-off of the AP state, TMR(V) = TMR0 / (1 + (V/V_h)^2)."""
    if MtjState(state) is MtjState.P:
        return p.G_P
    tmr = p.tmr0 / (1.0 + (v_applied / p.V_h) ** 2)
    return p.G_P / (1.0 + tmr)


@dataclass(frozen=True)
class DwDeviceState:
    """Domain-wall track: the wall at ``x`` separates the P region [0, x) from AP."""

    x: float = 0.0
    L: float = DW_TRACK_LENGTH
    mobility: float = DW_MOBILITY
    v_sat: float = math.inf
    G_DW: float = 0.0
    R_HM: float = DW_HM_RESISTANCE
    mtj: MtjParams = MtjParams()

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"track length must be positive, got {self.L}")
        if self.mobility <= 0:
            raise ValueError(f"DW mobility must be positive, got {self.mobility}")
        if self.v_sat <= 0:
            raise ValueError(f"saturation velocity must be positive, got {self.v_sat}")
        if self.R_HM <= 0:
            raise ValueError(f"heavy-metal resistance must be positive, got {self.R_HM}")
        if self.G_DW < 0:
            raise ValueError("G_DW must be non-negative")
        # the wall never leaves the track
        object.__setattr__(self, "x", min(max(float(self.x), 0.0), self.L))

    @property
    def fraction(self) -> float:
        return self.x / self.L

    def at(self, x: float) -> "DwDeviceState":
        return replace(self, x=x)

    @property
    def g_min(self) -> float:
        return self.mtj.G_AP + self.G_DW

    @property
    def g_max(self) -> float:
        return self.mtj.G_P + self.G_DW

    @property
    def g_slope(self) -> float:
        """Conductance change per metre of wall displacement."""
        return (self.mtj.G_P - self.mtj.G_AP) / self.L


def dw_conductance(s: DwDeviceState) -> float:
    f = s.x / s.L
    return s.mtj.G_P * f + s.mtj.G_AP * (1.0 - f) + s.G_DW


def dw_velocity(s: DwDeviceState, current: float) -> float:
    return math.copysign(min(s.mobility * abs(current), s.v_sat), current)


def dw_advance(s: DwDeviceState, current: float, dt: float) -> DwDeviceState:
    """Move the wall under a heavy-metal write current for ``dt`` (clamped to the track)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return s.at(s.x + dw_velocity(s, current) * dt)


def dw_write_energy(s: DwDeviceState, current: float, duration: float) -> float:
    return current * current * s.R_HM * duration


@dataclass(frozen=True)
class LsvParams:
    spin_flip_length: float
    polarization: float
    separation: float

    def __post_init__(self):
        if self.spin_flip_length <= 0:
            raise ValueError("spin-flip length must be positive")
        if not 0 <= self.polarization <= 1:
            raise ValueError("injector polarisation must be in [0, 1]")
        if self.separation < 0:
            raise ValueError("separation must be non-negative")


def lsv_injected_current(p: LsvParams, i_drive: float) -> float:
    if not math.isfinite(i_drive):
        raise ValueError("drive current must be finite")
    return p.polarization * i_drive * math.exp(-p.separation / p.spin_flip_length)
