"""Layer descriptors and the ``28x28-12c5-2s-10o`` topology notation."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Conv:
    maps_in: int
    maps_out: int
    kernel: int
    neuron: str = "if"


@dataclass(frozen=True)
class Subsample:
    window: int
    neuron: str = "if"


@dataclass(frozen=True)
class FullyConnected:
    n_in: int
    n_out: int
    neuron: str = "if"


Layer = Union[Conv, Subsample, FullyConnected]


@dataclass(frozen=True)
class NetworkTopology:
    input_shape: tuple  # (maps, rows, cols)
    layers: tuple

    def shapes(self) -> list[tuple]:
        """Activation shape after the input and after every layer."""
        out = [self.input_shape]
        c, h, w = self.input_shape
        for k, layer in enumerate(self.layers):
            if isinstance(layer, Conv):
                if layer.maps_in != c:
                    raise TopologyError(f"layer {k}: conv expects {layer.maps_in} maps, gets {c}")
                if layer.kernel > min(h, w):
                    raise TopologyError(f"layer {k}: kernel {layer.kernel} larger than {h}x{w} input")
                c, h, w = layer.maps_out, h - layer.kernel + 1, w - layer.kernel + 1
            elif isinstance(layer, Subsample):
                if h % layer.window or w % layer.window:
                    raise TopologyError(f"layer {k}: window {layer.window} does not divide {h}x{w}")
                h, w = h // layer.window, w // layer.window
            else:
                if layer.n_in != c * h * w:
                    raise TopologyError(
                        f"layer {k}: fully connected expects {layer.n_in} inputs, gets {c * h * w}")
                c, h, w = layer.n_out, 1, 1
            out.append((c, h, w))
        return out

    @property
    def n_outputs(self) -> int:
        c, h, w = self.shapes()[-1]
        return c * h * w

    def weight_shapes(self) -> list[tuple[int, int] | None]:
        """Crossbar (rows, cols) per layer; None for fixed subsampling."""
        out = []
        for layer in self.layers:
            if isinstance(layer, Conv):
                out.append((layer.maps_in * layer.kernel ** 2, layer.maps_out))
            elif isinstance(layer, FullyConnected):
                out.append((layer.n_in, layer.n_out))
            else:
                out.append(None)
        return out


_TOKEN = re.compile(r"^(?:(\d+)c(\d+)|(\d+)s|(\d+)o)$")


def parse_topology(text: str, neuron: str = "if") -> NetworkTopology:
    """Parse ``<H>x<W>(-<n>c<k>|-<s>s)*-<n>o``, e.g. ``28x28-12c5-2s-64c5-2s-10o``."""
    parts = text.strip().split("-")
    m = re.fullmatch(r"(\d+)x(\d+)", parts[0])
    if not m:
        raise TopologyError(f"topology must start with <H>x<W>, got {parts[0]!r}")
    shape = (1, int(m.group(1)), int(m.group(2)))
    if len(parts) < 2:
        raise TopologyError("topology needs at least an output layer")
    layers = []
    c, h, w = shape
    for k, tok in enumerate(parts[1:]):
        t = _TOKEN.match(tok)
        if not t:
            raise TopologyError(f"cannot parse layer token {tok!r}")
        is_last = k == len(parts) - 2
        if t.group(4) is not None:
            if not is_last:
                raise TopologyError("the output layer <n>o must come last")
            layers.append(FullyConnected(c * h * w, int(t.group(4)), neuron))
        elif is_last:
            raise TopologyError("topology must end with an output layer <n>o")
        elif t.group(1) is not None:
            layers.append(Conv(c, int(t.group(1)), int(t.group(2)), neuron))
        else:
            layers.append(Subsample(int(t.group(3)), neuron))
        topo = NetworkTopology(shape, tuple(layers))
        c, h, w = topo.shapes()[-1]
    return NetworkTopology(shape, tuple(layers))


def format_topology(t: NetworkTopology) -> str:
    parts = [f"{t.input_shape[1]}x{t.input_shape[2]}"]
    for layer in t.layers:
        if isinstance(layer, Conv):
            parts.append(f"{layer.maps_out}c{layer.kernel}")
        elif isinstance(layer, Subsample):
            parts.append(f"{layer.window}s")
        else:
            parts.append(f"{layer.n_out}o")
    return "-".join(parts)
