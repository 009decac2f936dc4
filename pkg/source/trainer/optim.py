"""
Optimizers over named parameter dictionaries.

Both steps are functional: they return new tensors and a new state and
leave their inputs untouched.
"""

import numpy as np

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

from numerics.tensor import Tensor
from utils.errors import ConfigurationError, DimensionError


class OptimizerKind(Enum):
    ADAM = "adam"
    GD = "gd"


@dataclass
class AdamState:
    """First and second moment estimates keyed by parameter name."""
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: Dict[str, Tensor] = field(default_factory=dict)
    v: Dict[str, Tensor] = field(default_factory=dict)


def _check(params: Dict[str, Tensor], grads: Dict[str, Tensor]) -> None:
    for name, value in params.items():
        if name not in grads:
            raise DimensionError(f"Missing gradient for '{name}'")
        if grads[name].shape != value.shape:
            raise DimensionError(f"Gradient for '{name}' has shape {grads[name].shape}, expected {value.shape}")


def adam_step(
    params: Dict[str, Tensor], grads: Dict[str, Tensor], state: AdamState, lr: float, t: int
) -> Tuple[Dict[str, Tensor], AdamState]:
    """
    One bias-corrected Adam update.

    Args:
        params: Current parameter values
        grads: Gradients with the same keys and shapes
        state: Moments from step ``t - 1`` (empty before the first step)
        lr: Learning rate
        t: 1-based step number

    Returns:
        (updated params, updated state)
    """
    if t < 1:
        raise ConfigurationError(f"Adam step number must be >= 1, got {t}")
    _check(params, grads)
    new_state = AdamState(beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    updated = {}
    for name, value in params.items():
        grad = grads[name]
        m = state.beta1 * state.m.get(name, np.zeros_like(value)) + (1.0 - state.beta1) * grad
        v = state.beta2 * state.v.get(name, np.zeros_like(value)) + (1.0 - state.beta2) * grad * grad
        new_state.m[name] = m
        new_state.v[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return updated, new_state


def gd_step(params: Dict[str, Tensor], grads: Dict[str, Tensor], lr: float) -> Dict[str, Tensor]:
    """Plain gradient descent."""
    _check(params, grads)
    return {name: value - lr * grads[name] for name, value in params.items()}
