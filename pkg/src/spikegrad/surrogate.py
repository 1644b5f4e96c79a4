"""Surrogate gradient families and their smooth antiderivatives.

sg_value is the stand-in for the Heaviside derivative used in the backward
pass. relaxed_activation is the matching smooth forward nonlinearity whose
analytic derivative equals sg_value exactly, which is what makes
finite-difference verification of the backprop engine meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARCTAN = "arctan"
PIECEWISE_LINEAR = "piecewise_linear"
FAMILIES = (ARCTAN, PIECEWISE_LINEAR)


@dataclass(frozen=True)
class SurrogateSpec:
    family: str = ARCTAN
    alpha: float = 2.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown surrogate family {self.family!r}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")


def sg_value(spec: SurrogateSpec, v: np.ndarray, v_th: float) -> np.ndarray:
    """Surrogate derivative dS/dV evaluated elementwise at potential v."""
    u = v - v_th
    a = spec.alpha
    if spec.family == ARCTAN:
        return a / (1.0 + (0.5 * np.pi * a * u) ** 2)
    return np.maximum(0.0, a * (1.0 - a * np.abs(u)))


def relaxed_activation(spec: SurrogateSpec, v: np.ndarray,
                       v_th: float) -> np.ndarray:
    """Smooth activation with d/dv == sg_value; zero at v == v_th."""
    u = v - v_th
    a = spec.alpha
    if spec.family == ARCTAN:
        return (2.0 / np.pi) * np.arctan(0.5 * np.pi * a * u)
    # Piecewise quadratic antiderivative of max(0, a(1 - a|u|)):
    # odd, a*u - a^2 u^2/2 on [0, 1/a], saturating at 1/2 outside the support.
    au = np.abs(u)
    inside = a * au - 0.5 * (a * au) ** 2
    return np.sign(u) * np.where(au <= 1.0 / a, inside, 0.5)
