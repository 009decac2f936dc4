"""
Grouped weighted sums.

Layers are split into contiguous groups; each group has its own softmax
weighted sum. Group outputs are concatenated along features (T x G*D)
and projected back to D.
"""

import numpy as np

from collections import OrderedDict
from typing import Dict, List, Tuple

from interfaces.spec import InterfaceSpec, group_slices
from numerics.kernels import softmax, softmax_backward
from numerics.tensor import Tensor


def group_weights(spec: InterfaceSpec, trainable: Dict[str, Tensor]) -> List[Tensor]:
    """Per-group normalized weights, in group order."""
    w = trainable["weights"]
    return [softmax(w[s]) for s in group_slices(w.shape[0], spec.num_groups)]


def forward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], h: Tensor) -> Tuple[Tensor, Dict]:
    slices = group_slices(h.shape[0], spec.num_groups)
    alphas = group_weights(spec, trainable)
    summed = [np.tensordot(alpha, h[s], axes=(0, 0)) for alpha, s in zip(alphas, slices)]
    concat = np.concatenate(summed, axis=1)
    z = concat @ trainable["proj_weight"] + trainable["proj_bias"]
    return z, {"h": h, "alphas": alphas, "slices": slices, "concat": concat}


def backward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], cache: Dict, grad_z: Tensor):
    h = cache["h"]
    dim = h.shape[2]
    grad_proj_weight = cache["concat"].T @ grad_z
    grad_proj_bias = grad_z.sum(axis=0)
    grad_concat = grad_z @ trainable["proj_weight"].T

    grad_w = np.zeros(h.shape[0])
    grad_h = np.zeros_like(h)
    for g, (alpha, s) in enumerate(zip(cache["alphas"], cache["slices"])):
        grad_sum = grad_concat[:, g * dim:(g + 1) * dim]
        grad_alpha = np.einsum("ltd,td->l", h[s], grad_sum)
        grad_w[s] = softmax_backward(alpha, grad_alpha)
        grad_h[s] = alpha[:, None, None] * grad_sum[None, :, :]

    grads = OrderedDict(weights=grad_w, proj_weight=grad_proj_weight, proj_bias=grad_proj_bias)
    return grads, grad_h
