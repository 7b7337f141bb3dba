"""Train the small reference CNN whose weights ship in data/weights.

Bias-free ReLU convolutions with average pooling, so the weights convert
directly to IF-neuron crossbars.  Requires torch (not a package dependency).

    python3 scripts/train_reference_ann.py --out data/weights
"""

import argparse
from pathlib import Path

import numpy as np
import torch
from torch import nn

from spinsnn.crossbar import save_weights
from spinsnn.datasets import load_mnist
from spinsnn.network.feedforward import ann_forward, normalize_weights
from spinsnn.network.topology import parse_topology

TOPOLOGY = "28x28-6c5-2s-12c5-2s-10o"


def build():
    return nn.Sequential(
        nn.Conv2d(1, 6, 5, bias=False), nn.ReLU(), nn.AvgPool2d(2),
        nn.Conv2d(6, 12, 5, bias=False), nn.ReLU(), nn.AvgPool2d(2),
        nn.Flatten(), nn.Linear(12 * 4 * 4, 10, bias=False))


def to_crossbar(model):
    out = []
    for m in model:
        if isinstance(m, nn.Conv2d):
            w = m.weight.detach().numpy()
            out.append(w.reshape(w.shape[0], -1).T.copy())
        elif isinstance(m, nn.Linear):
            out.append(m.weight.detach().numpy().T.copy())
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/weights")
    ap.add_argument("--epochs", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    torch.manual_seed(args.seed)
    tr = load_mnist("train")
    x = torch.tensor(tr.scaled().reshape(-1, 1, 28, 28), dtype=torch.float32)
    y = torch.tensor(tr.labels.astype(np.int64))
    model = build()
    opt = torch.optim.Adam(model.parameters(), lr=2e-3)
    for epoch in range(args.epochs):
        perm = torch.randperm(len(x))
        for k in range(0, len(x), 64):
            idx = perm[k:k + 64]
            opt.zero_grad()
            loss = nn.functional.cross_entropy(model(x[idx]), y[idx])
            loss.backward()
            opt.step()
        print(f"epoch {epoch}: loss {loss.item():.4f}")
    weights = to_crossbar(model)
    topo = parse_topology(TOPOLOGY)
    te = load_mnist("test")
    acc = (ann_forward(topo, weights, te.scaled())[-1].reshape(len(te), -1).argmax(1) == te.labels).mean()
    print(f"ANN test accuracy {acc:.4f}")
    # the input layer sees spike probabilities (peak 0.5), so calibrate on that scale
    weights = normalize_weights(topo, weights, 0.5 * tr.scaled()[:2000])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, w in enumerate(weights):
        save_weights(out / f"layer{k}.txt", w)
    (out / "topology.txt").write_text(TOPOLOGY + "\n")


if __name__ == "__main__":
    main()
