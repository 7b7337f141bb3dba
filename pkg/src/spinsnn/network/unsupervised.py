"""Single-layer unsupervised STDP network on a DW crossbar with WTA inhibition."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ..bench import EnergyLedger
from ..crossbar import Mode
from ..devices import DW_HM_RESISTANCE, DwDeviceState, MtjParams
from ..magnetodynamics import SwitchingCurve, sigmoid
from ..neurons import DW_SCHEDULE, TimestepSchedule
from ..plasticity import HomeostasisParams, LateralInhibition, StdpMode, StdpParams
from ..rng import RngStream, as_stream
from . import _kernel as K
from .encoding import spike_probability


class DivergenceWarning(RuntimeWarning):
    pass


# frozen fit of the calibrated in-plane binary synapse at 0.5 ns (I50, width)
BINARY_I50 = 72.05e-6
BINARY_WIDTH = 8.27e-6


def binary_switching_curve(i50: float = BINARY_I50, width: float = BINARY_WIDTH,
                           pulse_width: float = 0.5e-9) -> SwitchingCurve:
    currents = np.linspace(0.0, i50 + 8 * width, 201)
    probs = sigmoid(currents, i50, width)
    return SwitchingCurve(currents, probs, np.zeros_like(probs), pulse_width, 0)


@dataclass(frozen=True)
class NetworkConfig:
    """Device, circuit and learning constants of the STDP layer.

    Weights are DW positions (track fractions) of the synapses; each input
    drives a dual-row pair G+ = G_AP + w (G_P - G_AP), G- = G_AP.  Neuron
    thresholds are track-length multipliers raised by homeostasis.
    """

    n_neurons: int = 100
    timesteps: int = 50
    peak_probability: float = 0.5
    schedule: TimestepSchedule = DW_SCHEDULE
    read_voltage: float = 0.1
    mtj: MtjParams = MtjParams()
    synapse: DwDeviceState = DwDeviceState()
    neuron: DwDeviceState = DwDeviceState()
    G_s: float = 1.0 / DW_HM_RESISTANCE
    mode: Mode = Mode.NONIDEAL
    leak_current: float = 0.0
    stdp: StdpParams = StdpParams(A_plus=0.05, A_minus=0.0, tau_plus=200e-9, tau_minus=200e-9)
    silent_depression: float = 0.04
    homeostasis: HomeostasisParams = HomeostasisParams(theta_increment=0.05,
                                                       theta_decay_tau=1e-3)
    inhibition: LateralInhibition = LateralInhibition(True, 1.0)
    init_low: float = 0.0
    init_high: float = 0.3
    spike_share_cap: float = 0.5
    binary_curve: SwitchingCurve | None = None
    chunk: int = 64

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.n_neurons < 1 or self.timesteps < 1:
            raise ValueError("n_neurons and timesteps must be positive")
        if not 0 < self.peak_probability <= 1:
            raise ValueError("peak spike probability must lie in (0, 1]")
        if not 0 <= self.init_low <= self.init_high <= 1:
            raise ValueError("initial weights must satisfy 0 <= init_low <= init_high <= 1")
        if self.silent_depression < 0:
            raise ValueError("silent_depression must be non-negative")

    @property
    def step_duration(self) -> float:
        return self.schedule.duration

    @property
    def max_rate(self) -> float:
        return self.peak_probability / self.step_duration

    @property
    def probabilistic(self) -> bool:
        return self.stdp.mode is StdpMode.PROBABILISTIC

    def with_(self, **kw) -> "NetworkConfig":
        return replace(self, **kw)


def _pulse_coefficient(cfg: NetworkConfig, stdp: StdpParams) -> float:
    # an analog pulse moving the wall by dw (track fraction) carries
    # I = dw L / (mu t_prog) through the heavy metal for t_prog
    s = cfg.synapse
    i_per_w = s.L / (s.mobility * stdp.t_prog)
    return i_per_w ** 2 * s.R_HM * stdp.t_prog


def programming_energy_table(cfg: NetworkConfig, n: int = 256):
    """(flip probability grid, pulse energy) of binary-synapse programming pulses."""
    curve = cfg.binary_curve or binary_switching_curve()
    lo = float(curve.probability(curve.range[0]))
    grid = np.linspace(max(lo, 1e-6), 1.0 - 1e-6, n)
    current = np.array([curve.current_for(p) for p in grid])
    return grid, current ** 2 * cfg.synapse.R_HM * curve.pulse_width


def kernel_params(cfg: NetworkConfig, stdp: StdpParams, read_voltage: float,
                  silent_depression: float) -> np.ndarray:
    p = np.zeros(K.N_PARAMS)
    n = cfg.neuron
    h = cfg.homeostasis
    p[K.P_DV] = read_voltage
    p[K.P_DG] = cfg.mtj.G_P - cfg.mtj.G_AP
    p[K.P_GAP] = cfg.mtj.G_AP
    p[K.P_GS] = cfg.G_s
    p[K.P_MOB] = n.mobility * cfg.schedule.write / n.L
    p[K.P_LEAK] = n.mobility * cfg.leak_current * cfg.schedule.write / n.L
    p[K.P_DT] = cfg.step_duration
    p[K.P_AP] = stdp.A_plus
    p[K.P_TAUP] = stdp.tau_plus
    p[K.P_WINP] = stdp.positive_window
    p[K.P_AM] = stdp.A_minus
    p[K.P_TAUM] = stdp.tau_minus
    p[K.P_WINM] = stdp.negative_window
    p[K.P_ASIL] = silent_depression
    p[K.P_PMAX] = stdp.p_max
    p[K.P_TINC] = h.theta_increment
    p[K.P_TDEC] = math.exp(-cfg.step_duration / h.theta_decay_tau)
    p[K.P_TFLOOR] = h.theta_floor
    p[K.P_INHIB] = cfg.inhibition.displacement
    p[K.P_WTA] = float(cfg.inhibition.enabled)
    p[K.P_PROB] = float(stdp.mode is StdpMode.PROBABILISTIC)
    p[K.P_ECOEF] = _pulse_coefficient(cfg, stdp)
    p[K.P_TW] = cfg.schedule.write
    p[K.P_NONIDEAL] = float(cfg.mode is Mode.NONIDEAL)
    return p


def validate_images(images, n_features: int | None = None) -> np.ndarray:
    x = np.asarray(images, dtype=np.float64)
    if x.ndim == 3:
        x = x.reshape(len(x), -1)
    if x.ndim != 2:
        raise ValueError(f"expected (n_images, n_pixels) images, got shape {x.shape}")
    if not np.isfinite(x).all() or x.min(initial=0) < 0 or x.max(initial=0) > 1:
        raise ValueError("image intensities must be finite and normalised to [0, 1]")
    if n_features is not None and x.shape[1] != n_features:
        raise ValueError(f"expected {n_features} pixels per image, got {x.shape[1]}")
    return x


@dataclass
class Engine:
    """Stack of crossbars sharing one neuron layer; the state the kernel mutates."""

    cfg: NetworkConfig
    W: np.ndarray  # (arrays, inputs, neurons)
    theta: np.ndarray
    prm: np.ndarray  # (arrays, N_PARAMS)
    egrid: np.ndarray = field(default_factory=lambda: np.zeros(0))
    etable: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.W = np.ascontiguousarray(self.W, dtype=np.float64)
        if self.W.ndim != 3:
            raise ValueError("engine weights must be (arrays, inputs, neurons)")
        self.theta = np.array(self.theta, dtype=np.float64)
        self.stats = np.zeros((self.W.shape[0], K.N_STATS))

    @property
    def colsum(self) -> np.ndarray:
        return self.W.sum(axis=1)

    def present(self, images: np.ndarray, gen: np.random.Generator, learn: bool) -> np.ndarray:
        """Encode and present ``images`` in chunks; returns output spike counts."""
        cfg = self.cfg
        n_in = self.W.shape[1]
        counts = np.zeros((len(images), self.W.shape[2]), dtype=np.int64)
        colsum = self.colsum
        for lo in range(0, len(images), cfg.chunk):
            block = images[lo:lo + cfg.chunk]
            p = np.stack([spike_probability(im, cfg.max_rate, cfg.step_duration) for im in block])
            spikes = (gen.random((len(block), cfg.timesteps, n_in)) < p[:, None, :]).astype(np.uint8)
            seeds = gen.integers(0, 2 ** 63, size=len(block), dtype=np.int64).astype(np.uint64)
            K.run_chunk(self.W, self.theta, colsum, spikes, learn, self.prm, seeds,
                        self.egrid, self.etable, counts[lo:lo + cfg.chunk], self.stats)
        return counts

    def ledger(self, stats: np.ndarray | None = None) -> EnergyLedger:
        st = self.stats if stats is None else stats
        led = EnergyLedger()
        tot = st.sum(0)
        led.charge("synapse_read", int(tot[K.S_READ_EVENTS]), float(tot[K.S_READ_J]))
        led.charge("dw_write", int(tot[K.S_DW_WRITE]))
        led.charge("dw_reset", int(tot[K.S_DW_RESET]))
        led.charge("synapse_program", int(tot[K.S_PROG_EVENTS]), float(tot[K.S_PROG_J]))
        return led

    def programming_energy(self) -> np.ndarray:
        """Programming energy [J] spent so far by each array."""
        return self.stats[:, K.S_PROG_J].copy()


def init_weights(cfg: NetworkConfig, n_in: int, rng: RngStream | int, n_arrays: int = 1) -> np.ndarray:
    gen = as_stream(rng).generator()
    w = gen.uniform(cfg.init_low, cfg.init_high, size=(n_arrays, n_in, cfg.n_neurons))
    if cfg.probabilistic:
        # binary synapses: a P state with probability equal to the uniform draw mean
        w = (gen.random(w.shape) < w).astype(np.float64)
    return w


def make_engine(cfg: NetworkConfig, W: np.ndarray, theta: np.ndarray, arrays=None) -> Engine:
    """``arrays`` is a list of (StdpParams, read_voltage, silent_depression) per crossbar."""
    if arrays is None:
        arrays = [(cfg.stdp, cfg.read_voltage, cfg.silent_depression)]
    prm = np.stack([kernel_params(cfg, s, v, d) for s, v, d in arrays])
    if any(s.mode is StdpMode.PROBABILISTIC for s, _, _ in arrays):
        egrid, etable = programming_energy_table(cfg)
    else:
        egrid, etable = np.zeros(0), np.zeros(0)
    return Engine(cfg, W, theta, prm, egrid, etable)


@dataclass
class TrainResult:
    weights: np.ndarray  # (inputs, neurons), or (arrays, inputs, neurons) when stacked
    thresholds: np.ndarray
    ledger: EnergyLedger
    epoch_counts: list  # per-epoch spike totals per neuron
    programming_energy: np.ndarray  # J per array

    @property
    def max_spike_share(self) -> float:
        shares = [c.max() / max(c.sum(), 1) for c in self.epoch_counts]
        return float(max(shares, default=0.0))


def _check_share(counts: np.ndarray, cap: float, epoch: int):
    total = counts.sum()
    if total and counts.max() > cap * total:
        j = int(counts.argmax())
        warnings.warn(f"epoch {epoch}: neuron {j} took {counts[j] / total:.1%} of all spikes "
                      f"(cap {cap:.0%}); inhibition/homeostasis may be too weak",
                      DivergenceWarning, stacklevel=3)


def run_training(engine: Engine, images: np.ndarray, epochs: int, rng: RngStream,
                 callback=None) -> list:
    gen = rng.named("encode").generator()
    epoch_counts = []
    for e in range(epochs):
        counts = engine.present(images, gen, learn=True).sum(0)
        epoch_counts.append(counts)
        _check_share(counts, engine.cfg.spike_share_cap, e)
        if callback is not None:
            callback(e, engine)
    return epoch_counts


def train_unsupervised(images, cfg: NetworkConfig = NetworkConfig(), epochs: int = 1,
                       rng: RngStream | int = 0, weights=None, thresholds=None,
                       callback=None) -> TrainResult:
    """Unsupervised STDP training; a pure function of (image order, rng, cfg)."""
    x = validate_images(images)
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    rng = as_stream(rng)
    W = (init_weights(cfg, x.shape[1], rng.named("init")) if weights is None
         else np.array(weights, dtype=float).reshape(1, x.shape[1], cfg.n_neurons))
    theta = (np.full(cfg.n_neurons, cfg.homeostasis.theta_floor) if thresholds is None
             else np.array(thresholds, dtype=float))
    engine = make_engine(cfg, W, theta)
    counts = run_training(engine, x, epochs, rng, callback)
    return TrainResult(engine.W[0].copy(), engine.theta.copy(), engine.ledger(), counts,
                       engine.programming_energy())


def network_response(weights, thresholds, images, cfg: NetworkConfig, rng: RngStream | int,
                     ledger: EnergyLedger | None = None, read_voltages=None) -> np.ndarray:
    """Output spike counts (images x neurons) with plasticity and homeostasis frozen.

    ``weights`` may stack several crossbars (arrays, inputs, neurons) that
    drive the neurons together, each at its own entry of ``read_voltages``.
    """
    x = validate_images(images)
    W = np.asarray(weights, dtype=float)
    if W.ndim == 2:
        W = W[None]
    if W.shape[1] != x.shape[1]:
        raise ValueError(f"weights have {W.shape[1]} inputs, images {x.shape[1]} pixels")
    cfg = cfg.with_(n_neurons=W.shape[2])
    volts = [cfg.read_voltage] * W.shape[0] if read_voltages is None else list(read_voltages)
    if len(volts) != W.shape[0]:
        raise ValueError(f"{W.shape[0]} weight arrays but {len(volts)} read voltages")
    engine = make_engine(cfg, W.copy(), thresholds,
                         [(cfg.stdp, v, cfg.silent_depression) for v in volts])
    counts = engine.present(x, as_stream(rng).named("respond").generator(), learn=False)
    if ledger is not None:
        merged = ledger.merge(engine.ledger())
        ledger.counts, ledger.computed = merged.counts, merged.computed
    return counts


UNUSED = -1


@dataclass(frozen=True)
class ClassAssignment:
    labels: np.ndarray  # per neuron, UNUSED when silent on the labeled pass
    tally: np.ndarray  # (neurons, classes) spike counts of the labeled pass
    classes: np.ndarray

    def __post_init__(self):
        lab = self.labels[self.labels != UNUSED]
        if not np.isin(lab, self.classes).all():
            raise ValueError("assigned labels must be dataset classes")


def assign_labels(counts, labels, classes=None) -> ClassAssignment:
    """Each neuron takes the class with the highest mean response per image."""
    counts = np.asarray(counts)
    labels = np.asarray(labels)
    classes = np.unique(labels) if classes is None else np.asarray(classes)
    classes = classes.astype(np.int64)
    tally = np.stack([counts[labels == c].sum(0) for c in classes], axis=1)
    n_per = np.array([max((labels == c).sum(), 1) for c in classes])
    rate = tally / n_per
    out = np.where(tally.sum(1) > 0, classes[rate.argmax(1)], UNUSED)
    return ClassAssignment(out, tally, classes)


def classify(counts, assignment: ClassAssignment, vote: str = "mean") -> np.ndarray:
    """Predicted class per image from the spike counts of each class's neurons.

    ``mean`` averages over the class's neurons, ``sum`` adds them; images that
    raise no spike at all are predicted UNUSED (counted wrong).
    """
    counts = np.asarray(counts, dtype=float)
    scores = np.zeros((len(counts), len(assignment.classes)))
    for k, c in enumerate(assignment.classes):
        members = assignment.labels == c
        if members.any():
            s = counts[:, members].sum(1)
            scores[:, k] = s / members.sum() if vote == "mean" else s
    pred = assignment.classes[scores.argmax(1)]
    return np.where(counts.sum(1) > 0, pred, UNUSED)


def assign_and_classify(weights, thresholds, labeled_images, labeled_labels, test_images,
                        test_labels, cfg: NetworkConfig = NetworkConfig(), rng: RngStream | int = 0,
                        vote: str = "mean", read_voltages=None) -> float:
    rng = as_stream(rng)
    train_counts = network_response(weights, thresholds, labeled_images, cfg, rng.named("labeled"),
                                    read_voltages=read_voltages)
    assignment = assign_labels(train_counts, labeled_labels)
    test_counts = network_response(weights, thresholds, test_images, cfg, rng.named("test"),
                                   read_voltages=read_voltages)
    return float(np.mean(classify(test_counts, assignment, vote) == np.asarray(test_labels)))
