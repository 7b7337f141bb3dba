"""Converted (ANN-to-SNN) feedforward inference on crossbar layers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from ..bench import EnergyLedger
from ..crossbar import Mode, load_weights, program_weights
from ..magnetodynamics import SwitchingCurve
from ..rng import RngStream, as_stream
from .encoding import spike_probability
from .topology import Conv, FullyConnected, NetworkTopology, Subsample, TopologyError, parse_topology
from .unsupervised import binary_switching_curve


class FeedforwardNeuron(str, Enum):
    IF = "if"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class FeedforwardConfig:
    """Crossbar and neuron constants for converted networks.

    Logical weights map onto offset dual-row pairs with ``G_unit`` per unit
    weight; the neuron integrates the column current in units of
    ``dV G_unit``, so ideal mode reproduces the logical dot product.
    Stochastic neurons see I = I50 + width * slope * (z - center) through the
    characterised switching curve, a smooth stand-in for the clipped-linear
    rate clip(z, 0, 1) of an IF neuron, so the same converted weights serve
    both neuron kinds.
    """

    threshold: float = 1.0
    peak_probability: float = 0.5
    dV: float = 0.05
    G_unit: float = 1e-6
    G_off: float = 1e-6 / 3
    G_s: float = 1e-2
    mode: Mode = Mode.IDEAL
    curve: SwitchingCurve | None = None
    stochastic_center: float = 0.35
    stochastic_slope: float = 12.0
    batch: int = 100

    def switching_curve(self) -> SwitchingCurve:
        return self.curve or binary_switching_curve()

    def stochastic_map(self) -> tuple[float, float]:
        """(bias current, gain per unit net input) of the stochastic neuron drive."""
        curve = self.switching_curve()
        i50 = curve.current_for(0.5)
        # logistic width from the P = 0.269 / 0.731 points (+-1 width)
        width = (curve.current_for(0.7310585786300049) - curve.current_for(0.2689414213699951)) / 2
        gain = width * self.stochastic_slope
        return i50 - gain * self.stochastic_center, gain


def _check_weights(topology: NetworkTopology, weights: Sequence[np.ndarray]) -> list[np.ndarray]:
    shapes = topology.weight_shapes()
    need = [s for s in shapes if s is not None]
    if len(weights) != len(need):
        raise TopologyError(f"topology has {len(need)} weighted layers, got {len(weights)} weight matrices")
    out, it = [], iter(weights)
    for k, s in enumerate(shapes):
        if s is None:
            out.append(None)
            continue
        w = np.asarray(next(it), dtype=float)
        if w.shape != s:
            name = type(topology.layers[k]).__name__
            raise TopologyError(f"layer {k} ({name}): weight shape {w.shape} does not match expected {s}")
        out.append(w)
    return out


def im2col(x: np.ndarray, k: int) -> np.ndarray:
    """(B, C, H, W) -> (B, H-k+1, W-k+1, C*k*k), patch order (channel, row, col)."""
    win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))  # B C H' W' k k
    B, C, Ho, Wo = win.shape[:4]
    return win.transpose(0, 2, 3, 1, 4, 5).reshape(B, Ho, Wo, C * k * k)


def ann_forward(topology: NetworkTopology, weights, images, activation: str = "relu") -> list[np.ndarray]:
    """Reference analog forward pass; returns every layer's activation (B, C, H, W)."""
    ws = _check_weights(topology, weights)
    c, h, w = topology.input_shape
    x = np.asarray(images, dtype=float).reshape(-1, c, h, w)
    f = (lambda z: np.maximum(z, 0.0)) if activation == "relu" else (lambda z: 1 / (1 + np.exp(-z)))
    acts = []
    for layer, W in zip(topology.layers, ws):
        if isinstance(layer, Conv):
            x = f(im2col(x, layer.kernel) @ W).transpose(0, 3, 1, 2)
        elif isinstance(layer, Subsample):
            s = layer.window
            B, C, H, Wd = x.shape
            x = x.reshape(B, C, H // s, s, Wd // s, s).mean(axis=(3, 5))
        else:
            x = f(x.reshape(len(x), -1) @ W)[:, :, None, None]
        acts.append(x)
    return acts


@dataclass
class FeedforwardResult:
    scores: np.ndarray  # (images, classes) output spike counts
    layer_counts: list  # per layer (images, C, H, W) spike counts
    ledger: EnergyLedger = field(default_factory=EnergyLedger)

    @property
    def predictions(self) -> np.ndarray:
        return self.scores.argmax(1)


class _Layer:
    def __init__(self, layer, W, cfg: FeedforwardConfig, neuron: FeedforwardNeuron):
        self.layer = layer
        self.cfg = cfg
        self.neuron = neuron if not isinstance(layer, Subsample) else FeedforwardNeuron.IF
        self.W = W
        if W is not None:
            self.arr = program_weights(W, G_unit=cfg.G_unit, G_off=cfg.G_off, G_s=cfg.G_s,
                                       dV=cfg.dV, mode=cfg.mode)
            self.scale = 1.0 / (1.0 + self.arr.gamma) if cfg.mode is Mode.NONIDEAL else 1.0

    def net_input(self, s: np.ndarray, ledger: EnergyLedger | None) -> np.ndarray:
        layer = self.layer
        if isinstance(layer, Subsample):
            w = layer.window
            B, C, H, Wd = s.shape
            return s.reshape(B, C, H // w, w, Wd // w, w).mean(axis=(3, 5))
        if isinstance(layer, Conv):
            rows = im2col(s, layer.kernel)
        else:
            rows = s.reshape(len(s), -1)
        z = (rows @ self.W) * self.scale
        if ledger is not None:
            self._charge(rows, z, ledger)
        return z.transpose(0, 3, 1, 2) if isinstance(layer, Conv) else z[:, :, None, None]

    def _charge(self, rows, z, ledger):
        arr, dV, t = self.arr, self.cfg.dV, 2e-9
        flat = rows.reshape(-1, rows.shape[-1])
        vn = (z.reshape(len(flat), -1) * dV * self.cfg.G_unit / arr.G_s
              if arr.mode is Mode.NONIDEAL else np.zeros((len(flat), arr.shape[1])))
        gp, gm = flat @ arr.G_plus, flat @ arr.G_minus
        idle = (1 - flat) @ (arr.G_plus + arr.G_minus)
        e = (gp * (dV - vn) ** 2 + gm * (dV + vn) ** 2 + idle * vn ** 2).sum() * t
        n_active = int(flat.sum())
        if n_active:
            ledger.charge("synapse_read", 2 * n_active * arr.shape[1], float(e))


def infer_feedforward(topology: NetworkTopology | str, weights, inputs, neuron="if",
                      timesteps: int = 50, rng: RngStream | int = 0,
                      cfg: FeedforwardConfig = FeedforwardConfig(),
                      ledger: EnergyLedger | None = None) -> FeedforwardResult:
    """Spiking forward pass over ``timesteps``; class scores are output spike counts.

    ``inputs`` is either a batch of intensity images in [0, 1] (rate-encoded
    here) or a precomputed spike array of shape (timesteps, images, pixels).
    ``weights`` are matrices or weight-file paths, one per weighted layer.
    """
    topo = parse_topology(topology) if isinstance(topology, str) else topology
    ws = [load_weights(w) if isinstance(w, (str, Path)) else w for w in weights]
    ws = _check_weights(topo, ws)
    neuron = FeedforwardNeuron(neuron)
    gen = as_stream(rng).named("feedforward").generator()
    c, h, w = topo.input_shape
    x = np.asarray(inputs, dtype=float)
    pre_encoded = x.ndim == 3 and x.shape[2] == c * h * w and x.shape[0] == timesteps \
        and np.isin(x, (0, 1)).all()
    if pre_encoded:
        n_img = x.shape[1]
    else:
        x = x.reshape(-1, c * h * w)
        n_img = len(x)
    led = EnergyLedger() if ledger is None else ledger
    shapes = topo.shapes()
    total_counts = [np.zeros((n_img,) + s, dtype=np.int64) for s in shapes[1:]]
    layers = [_Layer(l, W, cfg, neuron) for l, W in zip(topo.layers, ws)]
    bias, gain = cfg.stochastic_map()
    curve = cfg.switching_curve()
    lo, hi = curve.range
    for b0 in range(0, n_img, cfg.batch):
        b1 = min(b0 + cfg.batch, n_img)
        if not pre_encoded:
            p = np.stack([spike_probability(im, cfg.peak_probability, 1.0) for im in x[b0:b1]])
        v = [np.zeros((b1 - b0,) + s) for s in shapes[1:]]
        for t in range(timesteps):
            if pre_encoded:
                s = x[t, b0:b1]
            else:
                s = (gen.random(p.shape) < p).astype(float)
            s = s.reshape((b1 - b0,) + shapes[0])
            for k, L in enumerate(layers):
                z = L.net_input(s, led)
                if L.neuron is FeedforwardNeuron.IF:
                    v[k] = np.maximum(v[k] + z, 0.0)
                    fired = v[k] >= cfg.threshold * (1 - 1e-12)
                    v[k][fired] = 0.0
                    if fired.any():
                        led.charge("dw_reset", int(fired.sum()))
                    led.charge("dw_write", int(np.count_nonzero(z)))
                else:
                    current = np.clip(bias + gain * z, lo, hi)
                    fired = gen.random(z.shape) < curve.probability(current)
                    led.charge("neuron_write", z.size)
                    led.charge("stochastic_read", z.size)
                    led.charge("neuron_reset", int(fired.sum()))
                s = fired.astype(float)
                total_counts[k][b0:b1] += fired
    scores = total_counts[-1].reshape(n_img, -1)
    return FeedforwardResult(scores, total_counts, led)


def normalize_weights(topology: NetworkTopology | str, weights, images, percentile: float = 99.9):
    """Data-based layer-wise rescaling so each layer's peak activation maps to threshold 1."""
    topo = parse_topology(topology) if isinstance(topology, str) else topology
    acts = ann_forward(topo, weights, images)
    out, prev, it = [], 1.0, iter(weights)
    for layer, a in zip(topo.layers, acts):
        if isinstance(layer, Subsample):
            continue
        lam = float(np.percentile(a, percentile)) or 1.0
        out.append(np.asarray(next(it), dtype=float) * prev / lam)
        prev = lam
    return out
