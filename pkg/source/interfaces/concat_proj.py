"""
Concatenation + learnable projection: (L, T, D) -> (T, L*D) -> (T, D).
"""

import numpy as np

from collections import OrderedDict
from typing import Dict, Tuple

from interfaces.spec import InterfaceSpec
from numerics.tensor import Tensor


def flatten_layers(h: Tensor) -> Tensor:
    """Layer-major feature order: column l*D + d holds h[l, :, d]."""
    num_layers, num_frames, dim = h.shape
    return h.transpose(1, 0, 2).reshape(num_frames, num_layers * dim)


def forward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], h: Tensor) -> Tuple[Tensor, Dict]:
    flat = flatten_layers(h)
    z = flat @ trainable["proj_weight"] + trainable["proj_bias"]
    return z, {"flat": flat, "shape": h.shape}


def backward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], cache: Dict, grad_z: Tensor):
    num_layers, num_frames, dim = cache["shape"]
    grads = OrderedDict(
        proj_weight=cache["flat"].T @ grad_z,
        proj_bias=grad_z.sum(axis=0),
    )
    grad_flat = grad_z @ trainable["proj_weight"].T
    grad_h = grad_flat.reshape(num_frames, num_layers, dim).transpose(1, 0, 2)
    return grads, np.ascontiguousarray(grad_h)
