"""Masked surrogate gradients: Bernoulli masks over weight gradients.

Masks are regenerated per (epoch, batch, layer) from keyed streams, so a
training run can be replayed bit-exactly and a test can re-derive the exact
mask any batch used. Entries are kept with probability 1 - p.
"""

from __future__ import annotations

import numpy as np

from .graph import NetworkParams
from .numerics import DomainError, sample_bernoulli, stream


def generate_masks(master_seed: int, params: NetworkParams, p: float,
                   epoch: int, batch: int) -> list[np.ndarray]:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"mask probability must be in [0,1], got {p}")
    return [
        sample_bernoulli(stream(master_seed, "msg", epoch, batch, l),
                         w.shape, 1.0 - p, dtype=w.dtype)
        for l, w in enumerate(params.weights)
    ]


def apply_mask(grads: list[np.ndarray], masks: list[np.ndarray],
               inverted_scaling: bool = False,
               p: float = 0.0) -> list[np.ndarray]:
    if len(grads) != len(masks):
        raise ValueError("gradient/mask count mismatch")
    if inverted_scaling and p >= 1.0:
        raise DomainError("inverted scaling requires p < 1")
    scale = 1.0 / (1.0 - p) if inverted_scaling else 1.0
    out = []
    for g, m in zip(grads, masks):
        if g.shape != m.shape:
            raise ValueError(f"shape mismatch: {g.shape} vs {m.shape}")
        out.append(g * m * scale)
    return out


def predicted_moments(mu: float, sigma: float, p: float) -> tuple[float, float]:
    """Mean and variance of the inverted-scaled masked gradient G = Gbar*m/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must be in [0,1), got {p}")
    return mu, sigma ** 2 + (p / (1.0 - p)) * (mu ** 2 + sigma ** 2)


def variance_oracle(mu: float, sigma: float, p: float, n_samples: int,
                    master_seed: int) -> tuple[float, float, float, float]:
    """Monte-Carlo check of the masked-gradient moment formulas.

    Samples Gbar ~ N(mu, sigma^2) and m ~ Bernoulli(1-p), forms
    G = Gbar * m / (1-p), and returns (empirical_mean, empirical_var,
    predicted_mean, predicted_var).
    """
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    if n_samples < 10_000:
        raise DomainError("need at least 10^4 samples")
    pred_mean, pred_var = predicted_moments(mu, sigma, p)
    g = stream(master_seed, "variance-oracle", mu, sigma, p).generator()
    gbar = mu + sigma * g.standard_normal(n_samples)
    m = (g.random(n_samples) >= p).astype(np.float64)
    samples = gbar * m / (1.0 - p)
    return (float(samples.mean()), float(samples.var()),
            float(pred_mean), float(pred_var))
