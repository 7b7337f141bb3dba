from pathlib import Path

import numpy as np
import pytest
from sklearn.base import clone

from spinsnn.crossbar import load_weights
from spinsnn.datasets import load_mnist
from spinsnn.network import FeedforwardSNNClassifier, UnsupervisedSTDPClassifier

WEIGHTS = Path(__file__).resolve().parents[1] / "data" / "weights"


@pytest.fixture(scope="module")
def mnist():
    ds = load_mnist("train").subset(0, 300)
    return ds.scaled(), ds.labels


def test_unsupervised_params_and_clone():
    est = UnsupervisedSTDPClassifier(n_neurons=12, epochs=2)
    params = est.get_params()
    assert params["n_neurons"] == 12 and params["epochs"] == 2
    c = clone(est).set_params(timesteps=10)
    assert c.timesteps == 10 and est.timesteps == 50


def test_unsupervised_fit_predict_transform(mnist):
    X, y = mnist
    est = UnsupervisedSTDPClassifier(n_neurons=16, timesteps=30, random_state=3).fit(X, y)
    assert est.weights_.shape == (1, 784, 16)
    counts = est.transform(X[:20])
    assert counts.shape == (20, 16)
    pred = est.predict(X[:50])
    assert set(pred) <= set(est.classes_)
    assert np.array_equal(pred, est.predict(X[:50]))
    assert 0.0 <= est.score(X[:50], y[:50]) <= 1.0
    with pytest.raises(ValueError):
        est.predict(X[:5, :100])
    with pytest.raises(ValueError):
        UnsupervisedSTDPClassifier().fit(X * 255, y)


def test_unsupervised_ltst_architecture(mnist):
    X, y = mnist
    est = UnsupervisedSTDPClassifier(n_neurons=8, timesteps=20, architecture="ltst").fit(X[:100], y[:100])
    assert est.weights_.shape == (2, 784, 8)
    assert est.programming_energy_ >= 0.0
    with pytest.raises(ValueError):
        UnsupervisedSTDPClassifier(architecture="triple").fit(X[:10], y[:10])


def test_feedforward_classifier_with_bundled_weights(mnist):
    X, y = mnist
    topo = (WEIGHTS / "topology.txt").read_text().strip()
    weights = [load_weights(WEIGHTS / f"layer{k}.txt") for k in range(3)]
    est = FeedforwardSNNClassifier(topology=topo, weights=weights, timesteps=25).fit(X, y)
    assert est.decision_function(X[:10]).shape == (10, 10)
    assert est.score(X[:60], y[:60]) > 0.8
    with pytest.raises(ValueError):
        FeedforwardSNNClassifier(topology=topo).fit(X, y)
    with pytest.raises(ValueError):
        FeedforwardSNNClassifier(topology="10x10-10o", weights=[np.zeros((100, 10))]).fit(X, y)
