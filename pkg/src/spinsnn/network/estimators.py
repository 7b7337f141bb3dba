"""scikit-learn estimators over the spiking networks."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..rng import RngStream
from ..plasticity import HomeostasisParams, LateralInhibition, StdpMode, StdpParams
from .feedforward import FeedforwardConfig, infer_feedforward
from .ltst import LtStConfig, train_lt_st
from .topology import parse_topology
from .unsupervised import (NetworkConfig, assign_labels, classify, network_response,
                           train_unsupervised)


def _unit_interval(X):
    if X.size and (X.min() < 0 or X.max() > 1):
        raise ValueError("inputs must be intensities in [0, 1]; scale pixels by 1/255")
    return X


class UnsupervisedSTDPClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Single-layer STDP network with WTA inhibition and homeostasis.

    ``fit`` learns the synapses without labels, then assigns each neuron the
    class it responds to most on the same data; ``transform`` returns the
    per-neuron spike counts and ``predict`` the class vote.
    ``architecture="ltst"`` trains the LT/ST dual crossbar instead.
    """

    def __init__(self, n_neurons=100, epochs=1, timesteps=50, A_plus=0.05, A_minus=0.0,
                 tau=200e-9, silent_depression=0.04, theta_increment=0.05, theta_decay_tau=1e-3,
                 read_voltage=0.1, inhibition=1.0, probabilistic=False, p_max=0.1,
                 architecture="single", vote="mean", random_state=0):
        self.n_neurons = n_neurons
        self.epochs = epochs
        self.timesteps = timesteps
        self.A_plus = A_plus
        self.A_minus = A_minus
        self.tau = tau
        self.silent_depression = silent_depression
        self.theta_increment = theta_increment
        self.theta_decay_tau = theta_decay_tau
        self.read_voltage = read_voltage
        self.inhibition = inhibition
        self.probabilistic = probabilistic
        self.p_max = p_max
        self.architecture = architecture
        self.vote = vote
        self.random_state = random_state

    def network_config(self) -> NetworkConfig:
        stdp = StdpParams(A_plus=self.A_plus, A_minus=self.A_minus, tau_plus=self.tau,
                          tau_minus=self.tau, p_max=self.p_max,
                          mode=StdpMode.PROBABILISTIC if self.probabilistic else StdpMode.ANALOG)
        return NetworkConfig(
            n_neurons=self.n_neurons, timesteps=self.timesteps, read_voltage=self.read_voltage,
            stdp=stdp, silent_depression=self.silent_depression,
            homeostasis=HomeostasisParams(self.theta_increment, self.theta_decay_tau),
            inhibition=LateralInhibition(self.inhibition > 0, max(self.inhibition, 0.0)))

    def _validate(self, X):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return _unit_interval(X)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        _unit_interval(X)
        if self.architecture not in ("single", "ltst"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        self.n_features_in_ = X.shape[1]
        cfg = self.network_config()
        if self.architecture == "single":
            res = train_unsupervised(X, cfg, self.epochs, rng=self.random_state)
            self.read_voltages_ = (cfg.read_voltage,)
            self.weights_ = res.weights[None]
        else:
            ltst = LtStConfig()
            res = train_lt_st(X, cfg, ltst, self.epochs, rng=self.random_state)
            self.read_voltages_ = ltst.read_voltages
            self.weights_ = res.weights
        self.thresholds_ = res.thresholds
        self.ledger_ = res.ledger
        self.programming_energy_ = float(np.sum(res.programming_energy))
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        counts = self._counts(X, "labeled")
        self.assignment_ = assign_labels(counts, y_idx, np.arange(len(self.classes_)))
        return self

    def _counts(self, X, tag):
        rng = RngStream(int(self.random_state)).named(tag)
        return network_response(self.weights_, self.thresholds_, X, self.network_config(), rng,
                                read_voltages=self.read_voltages_)

    def transform(self, X):
        check_is_fitted(self, "weights_")
        return self._counts(self._validate(X), "transform")

    def predict(self, X):
        check_is_fitted(self, "weights_")
        pred = classify(self._counts(self._validate(X), "predict"), self.assignment_, self.vote)
        # images with no output spike fall back to the first class
        return self.classes_[np.where(pred < 0, 0, pred)]


class FeedforwardSNNClassifier(ClassifierMixin, BaseEstimator):
    """Converted spiking network running pre-trained (loaded) crossbar weights.

    ``fit`` performs no training: it checks the weights against the topology
    and records the label set (output neuron k predicts ``classes_[k]``).
    """

    def __init__(self, topology="28x28-6c5-2s-12c5-2s-10o", weights=None, neuron="if",
                 timesteps=50, random_state=0):
        self.topology = topology
        self.weights = weights
        self.neuron = neuron
        self.timesteps = timesteps
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        topo = parse_topology(self.topology)
        c, h, w = topo.input_shape
        if X.shape[1] != c * h * w:
            raise ValueError(f"topology expects {c * h * w} inputs, X has {X.shape[1]}")
        if self.weights is None:
            raise ValueError("FeedforwardSNNClassifier needs pre-trained weights")
        self.classes_ = np.unique(y)
        if len(self.classes_) > topo.n_outputs:
            raise ValueError(f"{len(self.classes_)} classes but only {topo.n_outputs} output neurons")
        self.n_features_in_ = X.shape[1]
        self.topology_ = topo
        return self

    def decision_function(self, X):
        check_is_fitted(self, "topology_")
        X = _unit_interval(check_array(X, dtype=np.float64))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        res = infer_feedforward(self.topology_, self.weights, X, self.neuron, self.timesteps,
                                self.random_state)
        return res.scores[:, :len(self.classes_)].astype(float)

    def predict(self, X):
        return self.classes_[self.decision_function(X).argmax(1)]
