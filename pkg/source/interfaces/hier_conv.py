"""
Hierarchical convolution over the layer axis.

Each frame's (L, D) slice goes through ``depth`` identical D->D
convolutions (kernel 5, stride 3, padding 1) with gelu between them.
Any layer positions left after the last convolution are mean-pooled.
"""

import numpy as np

from collections import OrderedDict
from typing import Dict, Tuple

from interfaces.spec import InterfaceSpec, hierconv_depth
from numerics.kernels import conv1d_layer_axis, conv1d_layer_axis_backward, gelu, gelu_backward
from numerics.tensor import Tensor


def forward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], h: Tensor) -> Tuple[Tensor, Dict]:
    depth = hierconv_depth(h.shape[0])
    x = np.ascontiguousarray(h.transpose(1, 0, 2))  # (T, L, D)
    inputs, pre_acts = [], []
    for i in range(depth):
        inputs.append(x)
        y = conv1d_layer_axis(
            x, trainable[f"conv{i}_kernel"], trainable[f"conv{i}_bias"],
            spec.conv_stride, spec.conv_padding,
        )
        pre_acts.append(y)
        x = gelu(y) if i < depth - 1 else y
    z = x.mean(axis=1)
    return z, {"inputs": inputs, "pre_acts": pre_acts, "depth": depth}


def backward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], cache: Dict, grad_z: Tensor):
    depth = cache["depth"]
    final = cache["pre_acts"][-1]
    grad_x = np.repeat(grad_z[:, None, :] / final.shape[1], final.shape[1], axis=1)

    grads: Dict[str, Tensor] = {}
    for i in reversed(range(depth)):
        if i < depth - 1:
            grad_x = gelu_backward(cache["pre_acts"][i], grad_x)
        grad_kernel, grad_bias, grad_x = conv1d_layer_axis_backward(
            cache["inputs"][i], trainable[f"conv{i}_kernel"], grad_x,
            spec.conv_stride, spec.conv_padding,
        )
        grads[f"conv{i}_kernel"] = grad_kernel
        grads[f"conv{i}_bias"] = grad_bias

    ordered = OrderedDict((name, grads[name]) for name in trainable)
    grad_h = np.ascontiguousarray(grad_x.transpose(1, 0, 2))
    return ordered, grad_h
