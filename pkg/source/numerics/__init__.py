"""
Numerical kernels for LayerAgg.

This package provides dense float64 tensor helpers, the differentiable
kernels every interface is built from, a symmetric eigensolver and a
finite-difference gradient oracle.

Modules:
    tensor: Tensor helpers and the seeded generator
    kernels: matmul, softmax, layer_norm, gelu and layer-axis convolution with backward passes
    linalg: Cyclic Jacobi eigensolver
    gradcheck: Central finite differences and relative error
"""

__version__ = "1.0.0"

from .tensor import Tensor, Prng, make_prng
from .kernels import (
    matmul,
    softmax,
    softmax_backward,
    layer_norm,
    layer_norm_backward,
    gelu,
    gelu_backward,
    conv_output_length,
    conv1d_layer_axis,
    conv1d_layer_axis_backward,
)
from .linalg import sym_eig
from .gradcheck import finite_diff_grad, relative_error

__all__ = [
    "Tensor",
    "Prng",
    "make_prng",
    "matmul",
    "softmax",
    "softmax_backward",
    "layer_norm",
    "layer_norm_backward",
    "gelu",
    "gelu_backward",
    "conv_output_length",
    "conv1d_layer_axis",
    "conv1d_layer_axis_backward",
    "sym_eig",
    "finite_diff_grad",
    "relative_error",
]
