"""
Finite-difference gradient oracle.
"""

import numpy as np

from typing import Callable

from numerics.tensor import Tensor


def finite_diff_grad(f: Callable[[Tensor], float], x: Tensor, h: float = 1e-5) -> Tensor:
    """
    Central-difference gradient of a scalar function.

    ``f`` is evaluated on perturbed copies; ``x`` itself is left untouched.
    """
    if h <= 0:
        raise ValueError("Finite-difference step must be positive")
    x = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_g = grad.reshape(-1)
    for i in range(flat_x.size):
        original = flat_x[i]
        flat_x[i] = original + h
        f_plus = float(f(x))
        flat_x[i] = original - h
        f_minus = float(f(x))
        flat_x[i] = original
        flat_g[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def relative_error(analytic: Tensor, numeric: Tensor, floor: float = 1e-8) -> Tensor:
    """Per-coordinate |a - b| / max(floor, |a| + |b|)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    return np.abs(analytic - numeric) / np.maximum(floor, np.abs(analytic) + np.abs(numeric))
