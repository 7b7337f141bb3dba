"""Build the bundled IDX files from the digit JSON of the npm ``mnist`` package.

usage: python scripts/make_mnist.py <package>/src/digits [out_dir]

Each ``<d>.json`` holds ``{"data": [...]}``: 784 floats per sample, pixel/255.
The 10,000 samples are shuffled with a fixed seed and split 8,000 / 2,000.
"""

import json
import sys
from pathlib import Path

import numpy as np

from spinsnn.datasets import IdxDataset, write_idx

N_TRAIN = 8000


def main(src, out):
    images, labels = [], []
    for digit in range(10):
        data = np.asarray(json.loads((Path(src) / f"{digit}.json").read_text())["data"])
        imgs = np.rint(data.reshape(-1, 28, 28) * 255).clip(0, 255).astype(np.uint8)
        images.append(imgs)
        labels.append(np.full(len(imgs), digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(0).permutation(len(labels))
    images, labels = images[order], labels[order]
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(IdxDataset(images[:N_TRAIN], labels[:N_TRAIN]),
              out / "train-images-idx3-ubyte.gz", out / "train-labels-idx1-ubyte.gz", compress=True)
    write_idx(IdxDataset(images[N_TRAIN:], labels[N_TRAIN:]),
              out / "t10k-images-idx3-ubyte.gz", out / "t10k-labels-idx1-ubyte.gz", compress=True)
    print(f"wrote {N_TRAIN} train / {len(labels) - N_TRAIN} test samples to {out}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else "data/mnist")
