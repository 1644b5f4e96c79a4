"""Dense array arithmetic and keyed, reproducible random streams.

All tensors are plain numpy arrays. Training runs in float32, verification
harnesses in float64. Every sampling call is tied to an explicit stream key
so the same (master_seed, key) pair always reproduces the same values, no
matter in which order streams are consumed.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

DTYPE_TRAIN = np.float32
DTYPE_CHECK = np.float64


class DimensionError(ValueError):
    """Shapes incompatible with the requested operation."""


class NumericError(ArithmeticError):
    """A NaN or Inf appeared where a finite value is required."""


class DomainError(ValueError):
    """A parameter is outside its valid range."""


def require_finite(a: np.ndarray, what: str = "tensor") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise NumericError(f"non-finite values in {what}")
    return a


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    stream_key is a tuple like (purpose, epoch, batch, layer). Distinct keys
    give independent streams; the same key always gives the same sequence.
    """

    master_seed: int
    stream_key: tuple

    def _derived_key(self) -> int:
        h = hashlib.blake2b(digest_size=16)
        h.update(struct.pack("<q", self.master_seed))
        for part in self.stream_key:
            h.update(repr(part).encode("utf-8"))
            h.update(b"\x1f")
        return int.from_bytes(h.digest(), "little")

    def generator(self) -> np.random.Generator:
        # Philox is counter-based: evaluation order cannot change the values.
        return np.random.Generator(np.random.Philox(key=self._derived_key()))


def stream(master_seed: int, *key_parts) -> RngStream:
    return RngStream(master_seed, tuple(key_parts))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return require_finite(a @ b, "matmul result")


def _check_shapes(a: np.ndarray, b) -> None:
    if isinstance(b, np.ndarray) and b.ndim > 0 and a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def add(a: np.ndarray, b) -> np.ndarray:
    _check_shapes(a, b)
    return a + b


def sub(a: np.ndarray, b) -> np.ndarray:
    _check_shapes(a, b)
    return a - b


def mul(a: np.ndarray, b) -> np.ndarray:
    _check_shapes(a, b)
    return a * b


def scale(a: np.ndarray, s: float) -> np.ndarray:
    return a * s


def compare_ge(a: np.ndarray, b) -> np.ndarray:
    """Elementwise a >= b as {0,1} in a's dtype (Heaviside with theta(0)=1)."""
    _check_shapes(a, b)
    return (a >= b).astype(a.dtype)


def sample_bernoulli(s: RngStream, shape, keep_prob: float,
                     dtype=DTYPE_TRAIN) -> np.ndarray:
    if not 0.0 <= keep_prob <= 1.0:
        raise DomainError(f"keep_prob must be in [0,1], got {keep_prob}")
    if keep_prob == 1.0:
        return np.ones(shape, dtype=dtype)
    if keep_prob == 0.0:
        return np.zeros(shape, dtype=dtype)
    g = s.generator()
    return (g.random(shape) < keep_prob).astype(dtype)


def sample_gaussian(s: RngStream, shape, mu: float, sigma: float,
                    dtype=DTYPE_TRAIN) -> np.ndarray:
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.full(shape, mu, dtype=dtype)
    g = s.generator()
    return (mu + sigma * g.standard_normal(shape)).astype(dtype)
