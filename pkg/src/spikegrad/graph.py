"""Unrolled multi-layer SNN: forward over T timesteps and exact BPTT.

Layers 1..L-1 are LIF layers; layer L is a non-spiking, non-leaking
integrator whose per-timestep currents are recorded for downstream decoding.
Two forward modes share one graph topology:

  spiking  - Heaviside spikes; backward substitutes the surrogate derivative.
  relaxed  - the smooth surrogate antiderivative replaces the Heaviside, so
             backward (with reset_detach off) is the exact gradient of the
             forward map and can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lif import LifParams
from .numerics import DimensionError, require_finite, stream
from .surrogate import SurrogateSpec, relaxed_activation, sg_value

MODE_SPIKING = "spiking"
MODE_RELAXED = "relaxed"


@dataclass(frozen=True)
class NetworkSpec:
    layer_sizes: tuple[int, ...]
    timesteps: int
    lif: LifParams = field(default_factory=LifParams)
    surrogate: SurrogateSpec = field(default_factory=SurrogateSpec)
    reset_detach: bool = True

    def __post_init__(self):
        if len(self.layer_sizes) < 3:
            raise ValueError("need at least input, one hidden and output sizes")
        if any(d < 1 for d in self.layer_sizes):
            raise ValueError("layer sizes must be >= 1")
        if self.timesteps < 1:
            raise ValueError("timesteps must be >= 1")

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def num_hidden(self) -> int:
        return self.num_layers - 1


@dataclass
class NetworkParams:
    weights: list[np.ndarray]  # weights[l]: (d_{l+1}, d_l)

    def copy(self) -> "NetworkParams":
        return NetworkParams([w.copy() for w in self.weights])

    def astype(self, dtype) -> "NetworkParams":
        return NetworkParams([w.astype(dtype) for w in self.weights])


def init_params(spec: NetworkSpec, master_seed: int,
                dtype=np.float32) -> NetworkParams:
    """Kaiming-style scaled Gaussian init, one keyed stream per layer."""
    weights = []
    sizes = spec.layer_sizes
    for l in range(spec.num_layers):
        fan_in = sizes[l]
        g = stream(master_seed, "init", l).generator()
        w = g.standard_normal((sizes[l + 1], fan_in)) / np.sqrt(fan_in)
        weights.append(w.astype(dtype))
    return NetworkParams(weights)


@dataclass
class ForwardTrace:
    mode: str
    inputs: np.ndarray        # (T, batch, d_in)
    currents: list[np.ndarray]   # per hidden layer: (T, batch, d_l)
    v_pre: list[np.ndarray]      # pre-reset potentials, same shapes
    spikes: list[np.ndarray]     # spikes (spiking) or relaxed activations
    out_currents: np.ndarray     # (T, batch, d_out)


def _check_input(spec: NetworkSpec, x: np.ndarray) -> np.ndarray:
    d_in = spec.layer_sizes[0]
    if x.ndim == 2:
        if x.shape[1] != d_in:
            raise DimensionError(f"input dim {x.shape[1]} != {d_in}")
        return np.broadcast_to(x, (spec.timesteps,) + x.shape)
    if x.ndim == 3:
        if x.shape[0] != spec.timesteps or x.shape[2] != d_in:
            raise DimensionError(
                f"temporal input shape {x.shape} incompatible with "
                f"T={spec.timesteps}, d_in={d_in}")
        return x
    raise DimensionError(f"input must be 2-d or 3-d, got shape {x.shape}")


def forward(params: NetworkParams, spec: NetworkSpec, x: np.ndarray,
            mode: str = MODE_SPIKING) -> ForwardTrace:
    if mode not in (MODE_SPIKING, MODE_RELAXED):
        raise ValueError(f"unknown mode {mode!r}")
    xt = _check_input(spec, x)
    T = spec.timesteps
    batch = xt.shape[1]
    dtype = params.weights[0].dtype
    lif = spec.lif
    H = spec.num_hidden

    currents = [np.empty((T, batch, spec.layer_sizes[l + 1]), dtype=dtype)
                for l in range(H)]
    v_pre = [np.empty_like(c) for c in currents]
    spikes = [np.empty_like(c) for c in currents]
    out_currents = np.empty((T, batch, spec.layer_sizes[-1]), dtype=dtype)

    v = [np.full((batch, spec.layer_sizes[l + 1]), lif.v_reset, dtype=dtype)
         for l in range(H)]
    for t in range(T):
        s_prev = xt[t].astype(dtype, copy=False)
        for l in range(H):
            i_t = s_prev @ params.weights[l].T
            vp = v[l] + (i_t - v[l]) / lif.tau
            require_finite(vp, f"layer {l} potential at t={t}")
            if mode == MODE_SPIKING:
                s_t = (vp >= lif.v_th).astype(dtype)
            else:
                s_t = relaxed_activation(spec.surrogate, vp, lif.v_th)
            v[l] = vp * (1.0 - s_t) + lif.v_reset * s_t
            currents[l][t] = i_t
            v_pre[l][t] = vp
            spikes[l][t] = s_t
            s_prev = s_t
        out_currents[t] = s_prev @ params.weights[-1].T
    require_finite(out_currents, "output currents")
    return ForwardTrace(mode=mode, inputs=np.ascontiguousarray(xt),
                        currents=currents, v_pre=v_pre, spikes=spikes,
                        out_currents=out_currents)


def backward(trace: ForwardTrace, params: NetworkParams, spec: NetworkSpec,
             loss_grad_wrt_outputs: np.ndarray) -> list[np.ndarray]:
    """Reverse-mode gradients of the unrolled graph w.r.t. every weight.

    loss_grad_wrt_outputs: (T, batch, d_out), dLoss/d(out_currents[t]).
    In spiking mode dS/dV is the surrogate; temporal credit flows through the
    membrane recurrence with factor (1 - 1/tau). The reset product V*(1-S)
    passes gradient through V only when spec.reset_detach, through both
    factors otherwise.
    """
    T = spec.timesteps
    H = spec.num_hidden
    lif = spec.lif
    if loss_grad_wrt_outputs.shape != trace.out_currents.shape:
        raise DimensionError(
            f"upstream gradient shape {loss_grad_wrt_outputs.shape} != "
            f"{trace.out_currents.shape}")

    grads = [np.zeros_like(w, dtype=np.float64) for w in params.weights]

    # Output layer: out[t] = S[H-1][t] @ W[-1].T, no state.
    top_spikes = trace.spikes[H - 1] if H > 0 else trace.inputs
    g_s = np.empty_like(top_spikes, dtype=np.float64)  # dL/dS[H-1][t]
    for t in range(T):
        g_out = loss_grad_wrt_outputs[t]
        grads[-1] += g_out.T @ top_spikes[t]
        g_s[t] = g_out @ params.weights[-1]

    for l in range(H - 1, -1, -1):
        sg = sg_value(spec.surrogate, trace.v_pre[l], lif.v_th)
        s_below = trace.spikes[l - 1] if l > 0 else trace.inputs
        g_s_below = np.zeros_like(s_below, dtype=np.float64)
        g_v_post = 0.0  # dL/d(post-reset V[t]), zero past the horizon
        for t in range(T - 1, -1, -1):
            dpost_dpre = 1.0 - trace.spikes[l][t]
            if not spec.reset_detach:
                dpost_dpre = dpost_dpre - trace.v_pre[l][t] * sg[t]
            g_a = g_s[t] * sg[t] + g_v_post * dpost_dpre
            g_i = g_a / lif.tau
            g_v_post = g_a * (1.0 - 1.0 / lif.tau)
            grads[l] += g_i.T @ s_below[t]
            g_s_below[t] = g_i @ params.weights[l]
        g_s = g_s_below

    dtype = params.weights[0].dtype
    return [require_finite(g, "weight gradient").astype(dtype) for g in grads]


def firing_rates(trace: ForwardTrace) -> list[float]:
    """Mean spike value per hidden layer over (timesteps, batch, neurons)."""
    if trace.mode != MODE_SPIKING:
        raise ValueError("firing rates are only defined for spiking traces")
    return [float(s.mean()) for s in trace.spikes]
