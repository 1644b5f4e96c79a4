"""Dataset loading (IDX format), synthetic temporal data, and batching.

Static datasets hold (n, d) inputs that the network replays at every
timestep; temporal datasets hold (T, n, d) inputs with a genuinely
time-varying signal.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .numerics import stream

IDX_MAGIC_IMAGES = 0x00000803
IDX_MAGIC_LABELS = 0x00000801


class IdxFormatError(ValueError):
    """Malformed IDX file."""


@dataclass
class Dataset:
    inputs: np.ndarray          # (n, d) static or (T, n, d) temporal
    labels: np.ndarray          # (n,) int class indices
    num_classes: int

    def __post_init__(self):
        if self.labels.ndim != 1 or len(self.labels) < 1:
            raise ValueError("labels must be a non-empty vector")
        if np.any(self.labels < 0) or np.any(self.labels >= self.num_classes):
            raise ValueError("label outside [0, num_classes)")

    @property
    def temporal(self) -> bool:
        return self.inputs.ndim == 3

    @property
    def n(self) -> int:
        return len(self.labels)


def _read_exact(fh, count: int, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise IdxFormatError(f"truncated IDX file while reading {what}")
    return buf


def load_idx(images_path, labels_path, normalize: bool = True,
             dtype=np.float32) -> Dataset:
    """Parse a big-endian IDX image/label pair into a flat static dataset."""
    with open(images_path, "rb") as fh:
        magic, n, rows, cols = struct.unpack(">IIII", _read_exact(fh, 16, "image header"))
        if magic != IDX_MAGIC_IMAGES:
            raise IdxFormatError(f"bad image magic 0x{magic:08x}")
        raw = _read_exact(fh, n * rows * cols, "image data")
    images = np.frombuffer(raw, dtype=np.uint8).reshape(n, rows * cols)

    with open(labels_path, "rb") as fh:
        magic, n_labels = struct.unpack(">II", _read_exact(fh, 8, "label header"))
        if magic != IDX_MAGIC_LABELS:
            raise IdxFormatError(f"bad label magic 0x{magic:08x}")
        labels = np.frombuffer(_read_exact(fh, n_labels, "label data"), dtype=np.uint8)

    if n != n_labels:
        raise IdxFormatError(f"image count {n} != label count {n_labels}")
    inputs = images.astype(dtype)
    if normalize:
        inputs /= 255.0
    return Dataset(inputs=inputs, labels=labels.astype(np.int64),
                   num_classes=int(labels.max()) + 1)


def save_idx(images: np.ndarray, labels: np.ndarray, images_path,
             labels_path) -> None:
    """Write uint8 images (n, rows, cols) and labels (n,) in IDX format."""
    n, rows, cols = images.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_MAGIC_IMAGES, n, rows, cols))
        fh.write(np.ascontiguousarray(images, dtype=np.uint8).tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_MAGIC_LABELS, n))
        fh.write(np.ascontiguousarray(labels, dtype=np.uint8).tobytes())


@dataclass(frozen=True)
class SynthSpec:
    num_classes: int = 4
    dim: int = 32
    timesteps: int = 8
    informative_start: int = 4   # window [informative_start, timesteps)
    noise_sigma: float = 0.2
    pattern_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.informative_start < self.timesteps:
            raise ValueError("informative window must satisfy 0 <= t0 < T")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def generate_synthetic(spec: SynthSpec, n_samples: int,
                       split: str = "train", dtype=np.float32) -> Dataset:
    """Temporal dataset: class prototypes appear only inside the window.

    Before informative_start every timestep is pure noise; inside the window
    each sample carries its class prototype plus noise. Classes are balanced
    (round-robin) and everything is reproducible from spec.seed.
    """
    K, d, T = spec.num_classes, spec.dim, spec.timesteps
    proto_g = stream(spec.seed, "synth-prototypes").generator()
    prototypes = (proto_g.standard_normal((K, d)) * spec.pattern_scale)

    g = stream(spec.seed, "synth-samples", split).generator()
    labels = np.arange(n_samples) % K
    labels = g.permutation(labels)
    noise = g.standard_normal((T, n_samples, d)) * spec.noise_sigma
    inputs = noise
    inputs[spec.informative_start:] += prototypes[labels][None, :, :]
    return Dataset(inputs=inputs.astype(dtype), labels=labels.astype(np.int64),
                   num_classes=K)


def batches(dataset: Dataset, batch_size: int, shuffle_stream=None):
    """Yield (inputs, labels) minibatches; optional seeded shuffle per epoch.

    Temporal datasets yield (T, batch, d) slices; static ones (batch, d).
    The last partial batch is kept.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n = dataset.n
    if shuffle_stream is not None:
        order = shuffle_stream.generator().permutation(n)
    else:
        order = np.arange(n)
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        if dataset.temporal:
            yield dataset.inputs[:, idx, :], dataset.labels[idx]
        else:
            yield dataset.inputs[idx], dataset.labels[idx]
