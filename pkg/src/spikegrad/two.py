"""Temporally weighted output decoding.

Each timestep's output current is weighted by an importance factor f_t.
The factors start uniform (1/T), live on the probability simplex, and are
updated by low-pass filtering toward the normalized per-timestep accuracy
of the most recent batch. They receive no gradient and are frozen at
inference time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FrozenFactorsError(RuntimeError):
    """Attempted to update factors after freezing."""


@dataclass
class TemporalFactors:
    f: np.ndarray                 # (T,), float64, sums to 1
    beta: float = 0.9
    frozen: bool = False

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=np.float64)
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0,1], got {self.beta}")
        if self.f.ndim != 1 or np.any(self.f < 0):
            raise ValueError("factors must be a non-negative vector")

    @classmethod
    def uniform(cls, timesteps: int, beta: float = 0.9) -> "TemporalFactors":
        return cls(f=np.full(timesteps, 1.0 / timesteps), beta=beta)


def decode(factors: TemporalFactors, output_currents: np.ndarray) -> np.ndarray:
    """Weighted sum over timesteps: (T, batch, classes) -> (batch, classes)."""
    if output_currents.shape[0] != factors.f.shape[0]:
        raise ValueError(
            f"factor length {factors.f.shape[0]} != T={output_currents.shape[0]}")
    return np.tensordot(factors.f, output_currents, axes=(0, 0))


def mean_decode(output_currents: np.ndarray) -> np.ndarray:
    """Plain mean over timesteps (the uniform-factor special case)."""
    return output_currents.mean(axis=0)


def per_timestep_accuracy(output_currents: np.ndarray,
                          labels: np.ndarray) -> np.ndarray:
    """Top-1 accuracy of each timestep's current; argmax ties break low."""
    if output_currents.shape[1] == 0:
        raise ValueError("empty batch")
    preds = output_currents.argmax(axis=2)  # (T, batch); np.argmax ties -> lowest
    return (preds == labels[None, :]).mean(axis=1)


def update_factors(factors: TemporalFactors,
                   acc: np.ndarray) -> TemporalFactors:
    """Low-pass step f <- beta*f + (1-beta)*delta with delta = acc/sum(acc)."""
    if factors.frozen:
        raise FrozenFactorsError("factors are frozen")
    acc = np.asarray(acc, dtype=np.float64)
    if acc.shape != factors.f.shape:
        raise ValueError(f"accuracy shape {acc.shape} != {factors.f.shape}")
    total = acc.sum()
    if total > 0:
        delta = acc / total
    else:
        delta = np.full_like(factors.f, 1.0 / factors.f.shape[0])
    new_f = factors.beta * factors.f + (1.0 - factors.beta) * delta
    return TemporalFactors(f=new_f, beta=factors.beta, frozen=False)


def freeze(factors: TemporalFactors) -> TemporalFactors:
    return TemporalFactors(f=factors.f.copy(), beta=factors.beta, frozen=True)
