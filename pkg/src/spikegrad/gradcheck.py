"""Finite-difference verification of the BPTT engine.

Runs the network in relaxed mode at 64-bit with the reset term fully
differentiated, so the backward pass is the exact gradient of the forward
map and central differences are a valid oracle.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .graph import (MODE_RELAXED, NetworkParams, NetworkSpec, backward,
                    forward, init_params)
from .numerics import stream
from .optim import softmax_cross_entropy
from .two import TemporalFactors, decode


def relaxed_loss(params: NetworkParams, spec: NetworkSpec, x: np.ndarray,
                 labels: np.ndarray, factors: TemporalFactors) -> float:
    trace = forward(params, spec, x, MODE_RELAXED)
    y = decode(factors, trace.out_currents)
    loss, _ = softmax_cross_entropy(y, labels)
    return loss


def analytic_grads(params: NetworkParams, spec: NetworkSpec, x: np.ndarray,
                   labels: np.ndarray,
                   factors: TemporalFactors) -> list[np.ndarray]:
    trace = forward(params, spec, x, MODE_RELAXED)
    y = decode(factors, trace.out_currents)
    _, g_y = softmax_cross_entropy(y, labels)
    grad_out = factors.f[:, None, None] * g_y[None]
    return backward(trace, params, spec, grad_out)


def finite_difference_grads(params: NetworkParams, spec: NetworkSpec,
                            x: np.ndarray, labels: np.ndarray,
                            factors: TemporalFactors,
                            h: float = 1e-4) -> list[np.ndarray]:
    grads = []
    for w in params.weights:
        g = np.zeros_like(w)
        flat_w = w.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_w.size):
            orig = flat_w[i]
            flat_w[i] = orig + h
            up = relaxed_loss(params, spec, x, labels, factors)
            flat_w[i] = orig - h
            down = relaxed_loss(params, spec, x, labels, factors)
            flat_w[i] = orig
            flat_g[i] = (up - down) / (2.0 * h)
        grads.append(g)
    return grads


def max_relative_errors(analytic: list[np.ndarray],
                        numeric: list[np.ndarray],
                        floor: float = 1e-12) -> list[float]:
    """Per-layer max of |a-n| relative to the layer's gradient magnitude.

    The denominator is the largest entry magnitude in the layer, not the
    entry's own magnitude: central differences carry O(h^2) absolute noise,
    so a per-entry ratio on near-zero gradients measures only that noise.
    """
    errs = []
    for a, n in zip(analytic, numeric):
        scale = max(np.abs(a).max(), np.abs(n).max(), floor)
        errs.append(float(np.abs(a - n).max() / scale))
    return errs


def run_gradcheck(spec: NetworkSpec, master_seed: int = 0, batch: int = 3,
                  h: float = 1e-4, grad_transform=None) -> dict:
    """Build a 64-bit relaxed net, compare backward against central FD.

    grad_transform is a test hook applied to the analytic gradients before
    comparison (used as a negative control).
    """
    spec = replace(spec, reset_detach=False)
    params = init_params(spec, master_seed, dtype=np.float64)
    g = stream(master_seed, "gradcheck-batch").generator()
    x = g.standard_normal((batch, spec.layer_sizes[0]))
    labels = g.integers(0, spec.layer_sizes[-1], size=batch)
    factors = TemporalFactors.uniform(spec.timesteps)

    analytic = analytic_grads(params, spec, x, labels, factors)
    if grad_transform is not None:
        analytic = grad_transform(analytic)
    numeric = finite_difference_grads(params, spec, x, labels, factors, h=h)
    per_layer = max_relative_errors(analytic, numeric)
    return {
        "per_layer_max_rel_err": per_layer,
        "max_rel_err": max(per_layer),
        "passed": max(per_layer) <= 1e-5,
    }
