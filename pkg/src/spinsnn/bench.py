"""Per-event energy accounting and reports."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .csvio import render
from .devices import DW_PAIR_ENERGY

# Events whose energy is computed physically (V^2 G t or I^2 R t) per occurrence.
COMPUTED = ("synapse_read", "synapse_program", "neuron_leak")
TABULATED = ("dw_write", "dw_reset", "neuron_write", "neuron_reset", "stochastic_read",
             "digital_add", "step_neuron")
EVENTS = TABULATED + COMPUTED


@dataclass(frozen=True)
class CostTable:
    """Energy per event [J] for the tabulated event types."""

    dw_write: float = DW_PAIR_ENERGY / 2
    dw_reset: float = DW_PAIR_ENERGY / 2
    neuron_write: float = 1e-15  # stochastic MTJ neuron, one 0.5 ns write cycle
    neuron_reset: float = 1e-15
    stochastic_read: float = 5e-18  # (0.1 V)^2 * 1 uS * 0.5 ns
    digital_add: float = 30e-15
    step_neuron: float = 15e-15  # preset + evaluation decision

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0:
                raise ValueError(f"cost of {name} must be non-negative")

    def unit(self, event: str) -> float:
        return getattr(self, event)


class UnknownEventError(KeyError):
    pass


@dataclass
class EnergyLedger:
    costs: CostTable = field(default_factory=CostTable)
    counts: dict = field(default_factory=lambda: {e: 0 for e in EVENTS})
    computed: dict = field(default_factory=lambda: {e: 0.0 for e in COMPUTED})

    def _check(self, event):
        if event not in EVENTS:
            raise UnknownEventError(f"unknown energy event {event!r}; known: {', '.join(EVENTS)}")

    def charge(self, event: str, count: int = 1, energy: float | None = None) -> "EnergyLedger":
        """Record ``count`` occurrences; computed events also take their total ``energy`` [J]."""
        self._check(event)
        if count < 0:
            raise ValueError("event count must be non-negative")
        if event in COMPUTED:
            if energy is None:
                raise ValueError(f"{event} energy is computed per event; pass energy=")
            if energy < 0:
                raise ValueError("energy must be non-negative")
            self.computed[event] += float(energy)
        elif energy is not None:
            raise ValueError(f"{event} uses the cost table; do not pass energy=")
        self.counts[event] += int(count)
        return self

    def total(self, event: str | None = None) -> float:
        if event is None:
            return sum(self.total(e) for e in EVENTS)
        self._check(event)
        if event in COMPUTED:
            return self.computed[event]
        return self.counts[event] * self.costs.unit(event)

    def unit_cost(self, event: str) -> float:
        if event in COMPUTED:
            n = self.counts[event]
            return self.computed[event] / n if n else 0.0
        return self.costs.unit(event)

    def merge(self, other: "EnergyLedger") -> "EnergyLedger":
        if other.costs != self.costs:
            raise ValueError("cannot merge ledgers with different cost tables")
        out = EnergyLedger(self.costs)
        for e in EVENTS:
            out.counts[e] = self.counts[e] + other.counts[e]
        for e in COMPUTED:
            out.computed[e] = self.computed[e] + other.computed[e]
        return out

    __add__ = merge

    def copy(self) -> "EnergyLedger":
        return EnergyLedger(self.costs).merge(self)

    def to_dict(self) -> dict:
        return {"costs": asdict(self.costs), "counts": dict(self.counts),
                "computed_J": dict(self.computed)}

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyLedger":
        led = cls(CostTable(**d.get("costs", {})))
        for e, n in d.get("counts", {}).items():
            led._check(e)
            led.counts[e] = int(n)
        for e, j in d.get("computed_J", {}).items():
            if e not in COMPUTED:
                raise UnknownEventError(f"{e!r} is not a computed event")
            led.computed[e] = float(j)
        return led

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "EnergyLedger":
        return cls.from_dict(json.loads(Path(path).read_text()))


def charge(ledger: EnergyLedger, event: str, count: int = 1, energy: float | None = None) -> EnergyLedger:
    """Functional form: returns a new ledger with the event recorded."""
    return ledger.copy().charge(event, count, energy)


@dataclass(frozen=True)
class BaselineConfig:
    cmos_energy_per_inference: float
    source: str = "user-supplied"

    def __post_init__(self):
        if self.cmos_energy_per_inference <= 0:
            raise ValueError("baseline energy must be positive")


REPORT_HEADER = ("event_type", "count", "unit_cost_J", "total_J")


@dataclass
class Report:
    rows: list
    total_J: float
    inferences: int = 0
    baseline: BaselineConfig | None = None

    @property
    def per_inference_J(self) -> float | None:
        return self.total_J / self.inferences if self.inferences else None

    @property
    def ratio(self) -> float | None:
        """Baseline energy over spintronic energy, per inference."""
        if self.baseline is None or not self.per_inference_J:
            return None
        return self.baseline.cmos_energy_per_inference / self.per_inference_J

    def csv(self) -> str:
        return render(REPORT_HEADER, self.rows + [("total", sum(r[1] for r in self.rows), 0.0, self.total_J)])

    def text(self) -> str:
        lines = [f"{'event':<16}{'count':>12}{'unit [J]':>16}{'total [J]':>16}"]
        for ev, n, unit, tot in self.rows:
            lines.append(f"{ev:<16}{n:>12d}{unit:>16.6g}{tot:>16.6g}")
        lines.append(f"{'total':<16}{'':>12}{'':>16}{self.total_J:>16.6g}")
        if self.inferences:
            lines.append(f"per inference: {self.per_inference_J:.6g} J over {self.inferences} inferences")
        if self.ratio is not None:
            lines.append(f"improvement relative to user-supplied baseline ({self.baseline.source}): "
                         f"{self.ratio:.6g}x")
        return "\n".join(lines) + "\n"


def report(ledger: EnergyLedger, baseline: BaselineConfig | None = None, inferences: int = 0) -> Report:
    rows = [(e, ledger.counts[e], ledger.unit_cost(e), ledger.total(e)) for e in EVENTS]
    return Report(rows, ledger.total(), inferences, baseline)
