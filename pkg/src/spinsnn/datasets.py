"""IDX (MNIST-format) dataset reader and writer."""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
ENV_DIR = "SPINSNN_MNIST_DIR"
DEFAULT_DIR = Path(__file__).resolve().parents[2] / "data" / "mnist"


class IdxFormatError(ValueError):
    pass


@dataclass(frozen=True)
class IdxDataset:
    images: np.ndarray  # uint8 (count, rows, cols)
    labels: np.ndarray  # uint8 (count,)

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise IdxFormatError(
                f"image count {len(self.images)} does not match label count {len(self.labels)}")

    def __len__(self) -> int:
        return len(self.labels)

    def scaled(self) -> np.ndarray:
        """Flattened images with pixels in [0, 1]."""
        return self.images.reshape(len(self), -1).astype(np.float64) / 255.0

    def subset(self, start: int, stop: int | None = None) -> "IdxDataset":
        return IdxDataset(self.images[start:stop], self.labels[start:stop])


def _read_bytes(path) -> bytes:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _parse(raw: bytes, expected_magic: int, ndim: int, name: str) -> np.ndarray:
    header = 4 + 4 * ndim
    if len(raw) < 8:
        raise IdxFormatError(f"{name}: truncated header at byte offset {len(raw)}")
    magic = struct.unpack(">i", raw[:4])[0]
    if magic != expected_magic:
        raise IdxFormatError(f"{name}: bad magic number {magic} at byte offset 0, "
                             f"expected {expected_magic}")
    if len(raw) < header:
        raise IdxFormatError(f"{name}: truncated header at byte offset {len(raw)}")
    dims = struct.unpack(f">{ndim}i", raw[4:header])
    need = header + int(np.prod(dims))
    if len(raw) < need:
        raise IdxFormatError(f"{name}: truncated data at byte offset {len(raw)}, "
                             f"expected {need} bytes")
    if len(raw) > need:
        raise IdxFormatError(f"{name}: {len(raw) - need} trailing bytes after offset {need}")
    return np.frombuffer(raw, dtype=np.uint8, offset=header).reshape(dims).copy()


def load_idx(path_images, path_labels) -> IdxDataset:
    images = _parse(_read_bytes(path_images), IMAGE_MAGIC, 3, str(path_images))
    labels = _parse(_read_bytes(path_labels), LABEL_MAGIC, 1, str(path_labels))
    return IdxDataset(images, labels)


def encode_idx(array: np.ndarray, magic: int) -> bytes:
    array = np.ascontiguousarray(array, dtype=np.uint8)
    return struct.pack(f">i{array.ndim}i", magic, *array.shape) + array.tobytes()


def write_idx(dataset: IdxDataset, path_images, path_labels, compress: bool = False) -> None:
    for path, arr, magic in ((path_images, dataset.images, IMAGE_MAGIC),
                             (path_labels, dataset.labels, LABEL_MAGIC)):
        data = encode_idx(arr, magic)
        Path(path).write_bytes(gzip.compress(data, mtime=0) if compress else data)


SPLITS = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def mnist_dir(directory=None) -> Path:
    if directory is not None:
        return Path(directory)
    return Path(os.environ.get(ENV_DIR, DEFAULT_DIR))


def _find(directory: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx")):
        if (directory / name).exists():
            return directory / name
    raise FileNotFoundError(f"no {stem}[.gz] in {directory}")


def load_mnist(split: str = "train", directory=None) -> IdxDataset:
    """Standard IDX layout (``train-images-idx3-ubyte[.gz]`` ...) in ``directory``.

    The directory defaults to $SPINSNN_MNIST_DIR, then the bundled data/mnist.
    """
    d = mnist_dir(directory)
    img, lab = SPLITS[split]
    return load_idx(_find(d, img), _find(d, lab))
