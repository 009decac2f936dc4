"""
Weighted sum over layers: z_t = sum_l alpha_l * h_{l,t}.
"""

import numpy as np

from collections import OrderedDict
from typing import Dict, Tuple

from interfaces.spec import InterfaceSpec, Normalization
from numerics.kernels import softmax, softmax_backward
from numerics.tensor import Tensor


def layer_weights(spec: InterfaceSpec, trainable: Dict[str, Tensor]) -> Tensor:
    """Effective per-layer weights alpha."""
    w = trainable["weights"]
    if spec.normalize is Normalization.SOFTMAX:
        return softmax(w)
    return w


def forward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], h: Tensor) -> Tuple[Tensor, Dict]:
    alpha = layer_weights(spec, trainable)
    z = np.tensordot(alpha, h, axes=(0, 0))
    return z, {"h": h, "alpha": alpha}


def backward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], cache: Dict, grad_z: Tensor):
    h, alpha = cache["h"], cache["alpha"]
    grad_alpha = np.einsum("ltd,td->l", h, grad_z)
    if spec.normalize is Normalization.SOFTMAX:
        grad_w = softmax_backward(alpha, grad_alpha)
    else:
        grad_w = grad_alpha
    grad_h = alpha[:, None, None] * grad_z[None, :, :]
    return OrderedDict(weights=grad_w), grad_h
