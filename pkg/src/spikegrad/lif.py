"""Leaky integrate-and-fire dynamics in iterative form.

Membrane update: v_pre = v + (1/tau) * (input - v), i.e. the unit-step Euler
discretization of tau dv/dt = -(v - v_reset) + I with v_reset folded to 0 in
the leak term. Firing uses v_pre >= v_th (threshold crossing counts as a
spike); fired neurons hard-reset to v_reset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import require_finite


@dataclass(frozen=True)
class LifParams:
    tau: float = 2.0
    v_th: float = 0.5
    v_reset: float = 0.0

    def __post_init__(self):
        if self.tau <= 1.0:
            raise ValueError(f"tau must be > 1, got {self.tau}")
        if self.v_th <= self.v_reset:
            raise ValueError("v_th must exceed v_reset")


@dataclass
class LifState:
    v: np.ndarray
    s: np.ndarray

    @classmethod
    def zeros(cls, shape, params: LifParams, dtype=np.float32) -> "LifState":
        return cls(v=np.full(shape, params.v_reset, dtype=dtype),
                   s=np.zeros(shape, dtype=dtype))


def lif_step(state: LifState, input_current: np.ndarray,
             params: LifParams) -> tuple[LifState, np.ndarray]:
    """One timestep: leaky integration, thresholding, hard reset."""
    if state.v.shape != input_current.shape:
        raise ValueError(
            f"state/input shape mismatch: {state.v.shape} vs {input_current.shape}")
    require_finite(input_current, "input current")
    v_pre = state.v + (input_current - state.v) / params.tau
    spikes = (v_pre >= params.v_th).astype(v_pre.dtype)
    v_new = v_pre * (1.0 - spikes) + params.v_reset * spikes
    return LifState(v=v_new, s=spikes), spikes


def integrator_step(accumulator: np.ndarray,
                    input_current: np.ndarray) -> np.ndarray:
    """Non-leaky, non-spiking accumulation used by the output layer."""
    if accumulator.shape != input_current.shape:
        raise ValueError(
            f"shape mismatch: {accumulator.shape} vs {input_current.shape}")
    return accumulator + input_current
