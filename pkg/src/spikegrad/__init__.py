"""Spiking neural network training engine.

Direct training with surrogate gradients, Bernoulli-masked gradient
regularization, and temporally weighted output decoding, plus the
verification harnesses (finite-difference gradient checks, Monte-Carlo
variance oracle) used to validate them.
"""

from .graph import NetworkParams, NetworkSpec, backward, forward, init_params
from .lif import LifParams, LifState, integrator_step, lif_step
from .msg import apply_mask, generate_masks, variance_oracle
from .surrogate import SurrogateSpec, relaxed_activation, sg_value
from .two import TemporalFactors, decode, freeze, per_timestep_accuracy, update_factors

__all__ = [
    "NetworkParams", "NetworkSpec", "backward", "forward", "init_params",
    "LifParams", "LifState", "integrator_step", "lif_step",
    "apply_mask", "generate_masks", "variance_oracle",
    "SurrogateSpec", "relaxed_activation", "sg_value",
    "TemporalFactors", "decode", "freeze", "per_timestep_accuracy",
    "update_factors",
]

__version__ = "0.1.0"
