"""Loss, optimizers, cosine schedule, and the per-epoch training loop.

The training loop per minibatch: spiking forward, decode with the current
temporal factors, update the factors from this batch's per-timestep
accuracy, backprop with the surrogate, mask the gradients, and take an
optimizer step at the scheduled learning rate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import two as two_mod
from .data import Dataset, batches
from .graph import (MODE_SPIKING, NetworkParams, NetworkSpec, backward,
                    firing_rates, forward)
from .msg import apply_mask, generate_masks
from .numerics import NumericError, stream
from .two import TemporalFactors, decode, per_timestep_accuracy


def softmax_cross_entropy(logits: np.ndarray,
                          labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood and its gradient w.r.t. the logits."""
    n, k = logits.shape
    if np.any(labels < 0) or np.any(labels >= k):
        raise ValueError("label index out of range")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    nll = -(shifted[np.arange(n), labels]
            - np.log(exp.sum(axis=1)))
    loss = float(nll.mean())
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, (grad / n).astype(logits.dtype)


@dataclass(frozen=True)
class Schedule:
    lr_max: float
    total_steps: int
    lr_min: float = 0.0

    def __post_init__(self):
        if self.lr_min > self.lr_max:
            raise ValueError("lr_min must not exceed lr_max")
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")


def schedule_lr(s: Schedule, step: int) -> float:
    if not 0 <= step <= s.total_steps:
        raise ValueError(f"step {step} outside [0, {s.total_steps}]")
    return s.lr_min + 0.5 * (s.lr_max - s.lr_min) * (
        1.0 + math.cos(math.pi * step / s.total_steps))


SGD_MOMENTUM = "sgd_momentum"
ADAMW = "adamw"


@dataclass
class OptimizerState:
    kind: str = ADAMW
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-4
    step: int = 0
    bufs: list = field(default_factory=list)       # sgd momentum / adam m
    bufs2: list = field(default_factory=list)      # adam v

    def __post_init__(self):
        if self.kind not in (SGD_MOMENTUM, ADAMW):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")


def optimizer_step(state: OptimizerState, params: NetworkParams,
                   grads: list[np.ndarray], lr: float) -> None:
    """In-place parameter update; aborts on non-finite gradients."""
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient in optimizer step")
    if not state.bufs:
        state.bufs = [np.zeros_like(w) for w in params.weights]
        if state.kind == ADAMW:
            state.bufs2 = [np.zeros_like(w) for w in params.weights]
    state.step += 1
    if state.kind == SGD_MOMENTUM:
        for w, g, buf in zip(params.weights, grads, state.bufs):
            buf *= state.momentum
            buf += g
            w -= lr * buf
        return
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    for w, g, m, v in zip(params.weights, grads, state.bufs, state.bufs2):
        if state.weight_decay:
            w -= (lr * state.weight_decay) * w
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        w -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


@dataclass(frozen=True)
class MsgConfig:
    p: float = 0.0
    inverted_scaling: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"mask probability must be in [0,1], got {self.p}")


def train_epoch(spec: NetworkSpec, params: NetworkParams, msg_cfg: MsgConfig,
                factors: TemporalFactors, opt: OptimizerState,
                schedule: Schedule, dataset: Dataset, batch_size: int,
                epoch: int, master_seed: int,
                two_enabled: bool = True) -> tuple[TemporalFactors, dict]:
    """One pass over the data; mutates params/opt, returns updated factors."""
    t_start = time.perf_counter()
    loss_sum = 0.0
    correct = 0
    seen = 0
    acc_t_sum = np.zeros(spec.timesteps)
    n_batches = 0

    shuffle = stream(master_seed, "shuffle", epoch)
    for b, (x, labels) in enumerate(batches(dataset, batch_size, shuffle)):
        trace = forward(params, spec, x, MODE_SPIKING)
        f_decode = factors.f if two_enabled else np.full(
            spec.timesteps, 1.0 / spec.timesteps)
        y = np.tensordot(f_decode, trace.out_currents, axes=(0, 0))

        acc_t = per_timestep_accuracy(trace.out_currents, labels)
        if two_enabled:
            factors = two_mod.update_factors(factors, acc_t)

        loss, g_y = softmax_cross_entropy(y, labels)
        grad_out = f_decode[:, None, None].astype(g_y.dtype) * g_y[None]
        grads = backward(trace, params, spec, grad_out)
        masks = generate_masks(master_seed, params, msg_cfg.p, epoch, b)
        grads = apply_mask(grads, masks, msg_cfg.inverted_scaling, msg_cfg.p)

        lr = schedule_lr(schedule, min(opt.step, schedule.total_steps))
        optimizer_step(opt, params, grads, lr)

        n = len(labels)
        loss_sum += loss * n
        correct += int((y.argmax(axis=1) == labels).sum())
        seen += n
        acc_t_sum += acc_t * n
        n_batches += 1

    metrics = {
        "train_loss": loss_sum / seen,
        "train_acc": correct / seen,
        "per_timestep_train_acc": (acc_t_sum / seen).tolist(),
        "factors": factors.f.tolist(),
        "batches": n_batches,
        "wall_seconds": time.perf_counter() - t_start,
    }
    return factors, metrics


def evaluate(spec: NetworkSpec, params: NetworkParams,
             factors: TemporalFactors, dataset: Dataset,
             batch_size: int = 256) -> dict:
    """Frozen-factor evaluation: accuracy, per-timestep accuracy, firing rates."""
    if not factors.frozen:
        raise two_mod.FrozenFactorsError("evaluate requires frozen factors")
    correct = 0
    seen = 0
    acc_t_sum = np.zeros(spec.timesteps)
    rate_sum = None
    for x, labels in batches(dataset, batch_size):
        trace = forward(params, spec, x, MODE_SPIKING)
        y = decode(factors, trace.out_currents)
        n = len(labels)
        correct += int((y.argmax(axis=1) == labels).sum())
        acc_t_sum += per_timestep_accuracy(trace.out_currents, labels) * n
        rates = np.array(firing_rates(trace))
        rate_sum = rates * n if rate_sum is None else rate_sum + rates * n
        seen += n
    return {
        "accuracy": correct / seen,
        "per_timestep_acc": (acc_t_sum / seen).tolist(),
        "firing_rates": (rate_sum / seen).tolist(),
    }
