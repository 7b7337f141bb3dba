"""Spiking network assembly: encoding, unsupervised STDP, converted feedforward nets, LT/ST."""

from .encoding import EncodingError, SpikeTrain, poisson_encode, rate_for_peak, spike_probability
from .estimators import FeedforwardSNNClassifier, UnsupervisedSTDPClassifier
from .feedforward import (FeedforwardConfig, FeedforwardNeuron, FeedforwardResult, ann_forward,
                          infer_feedforward, normalize_weights)
from .ltst import LtStConfig, LtStResult, train_lt_st
from .topology import (Conv, FullyConnected, NetworkTopology, Subsample, TopologyError,
                       format_topology, parse_topology)
from .unsupervised import (UNUSED, ClassAssignment, DivergenceWarning, NetworkConfig, TrainResult,
                           assign_and_classify, assign_labels, binary_switching_curve, classify,
                           network_response, train_unsupervised)
