"""Dual-row bipolar resistive crossbar with finite neuron input conductance."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .bench import EnergyLedger
from .devices import MtjParams
from .neurons import TimestepSchedule

MAX_DRIVE = 0.1


class Mode(str, Enum):
    IDEAL = "ideal"
    NONIDEAL = "nonideal"


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class CrossbarArray:
    """``G_plus[i, j]`` / ``G_minus[i, j]`` sit on the V_i+ / V_i- rows of logical input i."""

    G_plus: np.ndarray
    G_minus: np.ndarray
    G_s: np.ndarray
    dV: float = 0.05
    mode: Mode = Mode.NONIDEAL
    G_off: float = 0.0
    G_unit: float = 1e-6

    def __post_init__(self):
        gp = np.array(self.G_plus, dtype=float, ndmin=2)
        gm = np.array(self.G_minus, dtype=float, ndmin=2)
        if gp.shape != gm.shape:
            raise ValueError(f"G_plus {gp.shape} and G_minus {gm.shape} differ in shape")
        gs = np.broadcast_to(np.asarray(self.G_s, dtype=float), (gp.shape[1],)).copy()
        if (gp < 0).any() or (gm < 0).any() or (gs <= 0).any():
            raise ValueError("conductances must be non-negative and G_s positive")
        # sign encoding: of each pair at most one device leaves the OFF state
        tol = 1e-9 * max(self.G_off, self.G_unit)
        if (np.minimum(gp, gm) > self.G_off + tol).any():
            raise ValueError("both devices of a dual-row pair are programmed above G_off")
        if abs(self.dV) > MAX_DRIVE:
            warnings.warn(f"drive voltage {self.dV} V above {MAX_DRIVE} V", stacklevel=2)
        for name, arr in (("G_plus", gp), ("G_minus", gm), ("G_s", gs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def shape(self) -> tuple[int, int]:
        return self.G_plus.shape

    def with_(self, **kw) -> "CrossbarArray":
        return replace(self, **kw)

    @property
    def gamma(self) -> np.ndarray:
        return (self.G_plus.sum(0) + self.G_minus.sum(0)) / self.G_s


def column_currents(arr: CrossbarArray, spikes) -> np.ndarray:
    """Neuron input currents of every column for a binary input vector."""
    s = np.asarray(spikes, dtype=float)
    if s.shape != (arr.shape[0],):
        raise ValueError(f"expected {arr.shape[0]} inputs, got shape {s.shape}")
    num = arr.dV * (s @ arr.G_plus - s @ arr.G_minus)
    if arr.mode is Mode.IDEAL:
        return num
    return num / (1.0 + arr.gamma)


def column_current(arr: CrossbarArray, spikes, j: int) -> float:
    return float(column_currents(arr, spikes)[j])


def node_voltages(arr: CrossbarArray, spikes) -> np.ndarray:
    """Potential of each column's neuron-input node (zero in ideal mode)."""
    if arr.mode is Mode.IDEAL:
        return np.zeros(arr.shape[1])
    return column_currents(arr, spikes) / arr.G_s


def program_weights(w, G_unit: float = 1e-6, G_off: float = 0.0, G_max: float | None = None,
                    G_s=1e-3, dV: float = 0.05, mode: Mode = Mode.NONIDEAL,
                    mapping: str = "offset", resolution: float | None = None) -> CrossbarArray:
    """Map logical weights onto dual-row conductances.

    ``offset`` mapping sets the active device to G_off + |w| G_unit so the OFF
    baseline cancels between the rows; ``direct`` sets it to |w| G_unit,
    which then has to be at least G_off.  ``resolution`` quantises the
    programmed conductance step (DW position resolution).
    """
    w = np.array(w, dtype=float, ndmin=2)
    if mapping not in ("offset", "direct"):
        raise ValueError(f"unknown mapping {mapping!r}")
    mag = np.abs(w) * G_unit
    if resolution is not None:
        mag = np.round(mag / resolution) * resolution
    active = G_off + mag if mapping == "offset" else mag
    bad = np.zeros(w.shape, dtype=bool)
    if G_max is not None:
        bad |= active > G_max * (1 + 1e-12)
    if mapping == "direct":
        bad |= (w != 0) & (active < G_off * (1 - 1e-12))
    if bad.any():
        idx = [tuple(int(v) for v in ij) for ij in np.argwhere(bad)[:10]]
        more = "" if bad.sum() <= 10 else f" and {int(bad.sum()) - 10} more"
        raise MappingError(f"weights outside the mappable range at {idx}{more}")
    gp = np.where(w > 0, active, G_off)
    gm = np.where(w < 0, active, G_off)
    return CrossbarArray(gp, gm, G_s, dV, mode, G_off, G_unit)


def program_from_device(w, mtj: MtjParams, w_max: float, **kw) -> CrossbarArray:
    """Offset mapping that places |w| = w_max at G_P and w = 0 at G_AP."""
    unit = (mtj.G_P - mtj.G_AP) / w_max
    return program_weights(w, G_unit=unit, G_off=mtj.G_AP, G_max=mtj.G_P, **kw)


def read_logical(arr: CrossbarArray) -> np.ndarray:
    return (arr.G_plus - arr.G_minus) / arr.G_unit


@dataclass(frozen=True)
class GammaReport:
    gamma: np.ndarray
    max_gamma: float
    write_cycle_multiplier: float
    error_bound: float


def gamma_report(arr: CrossbarArray | None, error_bound: float = 0.05) -> GammaReport:
    """Per-column gamma and the write-cycle stretch that restores full column charge.

    The column current is scaled by 1/(1+gamma); if the worst relative error
    gamma/(1+gamma) exceeds ``error_bound`` the write cycle should be
    lengthened by (1 + max gamma).
    """
    if arr is None or arr.G_plus.size == 0:
        n = 0 if arr is None else arr.shape[1]
        return GammaReport(np.zeros(n), 0.0, 1.0, error_bound)
    g = arr.gamma
    gmax = float(g.max())
    mult = 1.0 + gmax if gmax / (1 + gmax) > error_bound else 1.0
    return GammaReport(g, gmax, mult, error_bound)


def synapse_read_energy(arr: CrossbarArray, spikes, duration: float) -> float:
    """Sum of V^2 G t over every device; spiking rows sit at +-dV, the column at V_node."""
    s = np.asarray(spikes, dtype=float)
    vn = node_voltages(arr, s)
    vp = arr.dV * s[:, None] - vn[None, :]
    vm = -arr.dV * s[:, None] - vn[None, :]
    return float(((arr.G_plus * vp ** 2).sum() + (arr.G_minus * vm ** 2).sum()) * duration)


def run_timestep(arr: CrossbarArray, spikes, neurons, schedule: TimestepSchedule,
                 ledger: EnergyLedger | None = None):
    """One write/read/reset cycle: column currents drive the neuron layer.

    ``neurons`` is any layer with ``step(currents, ledger)`` returning fired
    flags.  Returns (fired, ledger delta).
    """
    delta = EnergyLedger() if ledger is None else EnergyLedger(ledger.costs)
    s = np.asarray(spikes)
    currents = column_currents(arr, s)
    n_active = int(np.count_nonzero(s))
    if n_active:
        delta.charge("synapse_read", 2 * n_active * arr.shape[1],
                     synapse_read_energy(arr, s, schedule.write))
    fired = neurons.step(currents, delta)
    if ledger is not None:
        for e, n in delta.counts.items():
            ledger.counts[e] += n
        for e, j in delta.computed.items():
            ledger.computed[e] += j
    return fired, delta


@dataclass
class TiledCrossbar:
    """A logical layer split into ``tile`` x ``tile`` physical arrays.

    Each physical tile has its own gamma; partial column currents of the row
    tiles are summed digitally and every summation is charged as one add.
    """

    tiles: list
    row_slices: list
    col_slices: list
    shape: tuple

    @classmethod
    def partition(cls, arr: CrossbarArray, tile: int = 32) -> "TiledCrossbar":
        m, n = arr.shape
        rows = [slice(r, min(r + tile, m)) for r in range(0, m, tile)]
        cols = [slice(c, min(c + tile, n)) for c in range(0, n, tile)]
        tiles = [[replace(arr, G_plus=arr.G_plus[r, c], G_minus=arr.G_minus[r, c], G_s=arr.G_s[c])
                  for c in cols] for r in rows]
        return cls(tiles, rows, cols, (m, n))

    @property
    def n_tiles(self) -> int:
        return len(self.row_slices) * len(self.col_slices)

    def column_currents(self, spikes, ledger: EnergyLedger | None = None) -> np.ndarray:
        s = np.asarray(spikes, dtype=float)
        out = np.zeros(self.shape[1])
        for r, row in zip(self.row_slices, self.tiles):
            for c, t in zip(self.col_slices, row):
                out[c] += column_currents(t, s[r])
        adds = (len(self.row_slices) - 1) * self.shape[1]
        if ledger is not None and adds:
            ledger.charge("digital_add", adds)
        return out


# ---------------------------------------------------------------------------
# weight files

HEADER = "spinsnn-weights v1"


class WeightFileError(ValueError):
    pass


def format_weights(w) -> str:
    w = np.array(w, dtype=float, ndmin=2)
    if w.ndim != 2:
        raise ValueError("weight matrix must be 2-D")
    lines = [f"{HEADER} {w.shape[0]} {w.shape[1]}"]
    lines += [" ".join(f"{v:.9g}" for v in row) for row in w]
    return "\n".join(lines) + "\n"


def save_weights(path, w) -> None:
    Path(path).write_text(format_weights(w))


def parse_weights(text: str, source: str = "<string>") -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise WeightFileError(f"{source}: empty weight file")
    head = lines[0].split()
    if len(head) != 4 or " ".join(head[:2]) != HEADER:
        raise WeightFileError(f"{source}: expected header '{HEADER} <m> <n>', got {lines[0]!r}")
    try:
        m, n = int(head[2]), int(head[3])
    except ValueError:
        raise WeightFileError(f"{source}: non-integer dimensions in header {lines[0]!r}") from None
    values = " ".join(lines[1:]).split()
    if len(values) != m * n:
        raise WeightFileError(f"{source}: header declares {m}x{n} = {m * n} weights, found {len(values)}")
    try:
        arr = np.array([float(v) for v in values])
    except ValueError as exc:
        raise WeightFileError(f"{source}: {exc}") from None
    return arr.reshape(m, n)


def load_weights(path) -> np.ndarray:
    return parse_weights(Path(path).read_text(), str(path))
