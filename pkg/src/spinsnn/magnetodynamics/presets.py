"""Named nanomagnet parameter sets.

Dimensions follow the two device stacks the models are built around; the
material constants (Ms, alpha, Nz, spin-Hall angle) are typical literature
values for those stacks, and the IMA Ku2 is the output of
``calibrate_anisotropy`` at P(71 uA, 0.5 ns) = 0.5 (seed 2024, 4000 trials,
dt = 1 ps).  Re-run ``spinsnn characterize-switching --calibrate`` to refresh.
"""

import math

from ..constants import K_B
from .core import MagnetParams, SheGeometry

DEFAULT_DT = 1e-12

# elliptic in-plane CoFe(1.2 nm) free layer, pi/4 x 100 x 40 nm^2, on W(2 nm)
IMA_VOLUME = math.pi / 4 * 100e-9 * 40e-9 * 1.2e-9
IMA_KU2 = 7.0400638e4

IMA_PRESET = MagnetParams(
    Ms=1.0e6,
    Ku2=IMA_KU2,
    volume=IMA_VOLUME,
    alpha=0.012,
    easy_axis=(1.0, 0.0, 0.0),
    demag=(0.0, 0.0, 0.9),  # thin-film out-of-plane factor; in-plane shape folded into Ku2
    temperature=300.0,
)
# charge current flows along the 40 nm axis, so spins enter over 40 nm / 2 nm
IMA_SHE = SheGeometry(theta_sh=0.3, w_fm=40e-9, t_hm=2e-9)

# circular perpendicular CoFeB(1.5 nm), pi/4 x 40 x 40 nm^2, on beta-W
PMA_VOLUME = math.pi / 4 * 40e-9 * 40e-9 * 1.5e-9

PMA_PRESET = MagnetParams(
    Ms=1.1e6,
    Ku2=40 * K_B * 300.0 / PMA_VOLUME,
    volume=PMA_VOLUME,
    alpha=0.0122,
    easy_axis=(0.0, 0.0, 1.0),
    demag=(0.0, 0.0, 0.0),  # effective anisotropy already net of shape
    temperature=300.0,
)
PMA_SHE = SheGeometry(theta_sh=0.3, w_fm=40e-9, t_hm=3e-9)

IMA_TARGET_CURRENT = 71e-6
IMA_TARGET_WIDTH = 0.5e-9

PRESETS = {"ima": (IMA_PRESET, IMA_SHE), "pma": (PMA_PRESET, PMA_SHE)}


def preset(name: str):
    """(MagnetParams, SheGeometry) for a preset name."""
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown magnet preset {name!r}; choose from {sorted(PRESETS)}") from None

# Volatile (STP/LTP) synapse: the same perpendicular stack with a stronger
# anisotropy and lower damping, chosen by a sweep so that five 1 ns pulses
# separate cleanly between 3 ns and 6 ns spacing.  Needs dt <= 0.5 ps.
VOLATILE_PRESET = PMA_PRESET.replace(Ku2=250 * K_B * 300.0 / PMA_VOLUME, alpha=0.003)
VOLATILE_DT = 0.5e-12

PRESETS["volatile"] = (VOLATILE_PRESET, None)
