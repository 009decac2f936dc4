"""
Differentiable kernels used by every interface.

Each forward kernel has a ``*_backward`` companion returning
vector-Jacobian products. There is no autodiff graph; callers keep
whatever they need from the forward pass.
"""

import numpy as np

from scipy.special import erf
from typing import Tuple

from numerics.tensor import Tensor, ensure_finite
from utils.errors import DimensionError, DegenerateWindowError

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a (m x k) and b (k x n)."""
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul inner extents differ: {a.shape} x {b.shape}")
    return ensure_finite(a @ b, "matmul")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax along ``axis``."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_backward(y: Tensor, grad_y: Tensor, axis: int = -1) -> Tensor:
    """Gradient w.r.t. the softmax input given its output ``y``."""
    return y * (grad_y - np.sum(grad_y * y, axis=axis, keepdims=True))


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to mean 0 / variance 1, then apply gamma and beta."""
    if gamma.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise DimensionError(f"layer_norm affine shapes {gamma.shape}/{beta.shape} do not match D={x.shape[-1]}")
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = np.mean(centered * centered, axis=-1, keepdims=True)
    x_hat = centered / np.sqrt(var + eps)
    return ensure_finite(gamma * x_hat + beta, "layer_norm")


def layer_norm_backward(
    x: Tensor, gamma: Tensor, grad_y: Tensor, eps: float = 1e-5
) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Backward pass of :func:`layer_norm`.

    Returns:
        (grad_x, grad_gamma, grad_beta)
    """
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = np.mean(centered * centered, axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std

    lead = tuple(range(x.ndim - 1))
    grad_gamma = np.sum(grad_y * x_hat, axis=lead)
    grad_beta = np.sum(grad_y, axis=lead)

    g_hat = grad_y * gamma
    grad_x = inv_std * (
        g_hat
        - g_hat.mean(axis=-1, keepdims=True)
        - x_hat * np.mean(g_hat * x_hat, axis=-1, keepdims=True)
    )
    return grad_x, grad_gamma, grad_beta


def gelu(x: Tensor) -> Tensor:
    """Exact gelu, x * Phi(x)."""
    return 0.5 * x * (1.0 + erf(x / _SQRT2))


def gelu_backward(x: Tensor, grad_y: Tensor) -> Tensor:
    cdf = 0.5 * (1.0 + erf(x / _SQRT2))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return grad_y * (cdf + x * pdf)


def conv_output_length(length: int, kernel: int, stride: int, padding: int) -> int:
    """
    Output extent of a zero-padded strided convolution.

    Raises:
        DegenerateWindowError: If the padded input is shorter than the kernel
    """
    if kernel < 1 or stride < 1 or padding < 0:
        raise DegenerateWindowError(
            f"Invalid convolution geometry: kernel={kernel}, stride={stride}, padding={padding}"
        )
    if length + 2 * padding < kernel:
        raise DegenerateWindowError(
            f"Padded length {length + 2 * padding} is shorter than kernel {kernel}"
        )
    return (length + 2 * padding - kernel) // stride + 1


def _window_index(out_len: int, kernel: int, stride: int) -> np.ndarray:
    return np.arange(out_len)[:, None] * stride + np.arange(kernel)[None, :]


def conv1d_layer_axis(
    stack: Tensor, kernels: Tensor, bias: Tensor, stride: int, padding: int
) -> Tensor:
    """
    1-D convolution over the layer axis.

    The spatial axis is the layer index and the channels are the feature
    dimension: ``out[p, d] = bias[d] + sum_{k, c} kernels[k, c, d] * in_padded[p*stride + k, c]``.

    Args:
        stack: Input of shape (..., L, D_in); leading axes are independent (e.g. frames)
        kernels: Weights of shape (K, D_in, D_out)
        bias: Bias of shape (D_out,)
        stride: Step between windows
        padding: Zeros added at both ends of the layer axis

    Returns:
        Output of shape (..., L', D_out)
    """
    if stack.ndim < 2:
        raise DimensionError(f"conv1d_layer_axis expects (..., L, D), got {stack.shape}")
    k, d_in, d_out = kernels.shape
    if stack.shape[-1] != d_in or bias.shape != (d_out,):
        raise DimensionError(
            f"conv1d_layer_axis channel mismatch: input {stack.shape}, kernels {kernels.shape}, bias {bias.shape}"
        )
    length = stack.shape[-2]
    out_len = conv_output_length(length, k, stride, padding)

    pad_width = [(0, 0)] * (stack.ndim - 2) + [(padding, padding), (0, 0)]
    padded = np.pad(stack, pad_width)
    patches = padded[..., _window_index(out_len, k, stride), :]  # (..., L', K, D_in)
    cols = patches.reshape(patches.shape[:-2] + (k * d_in,))
    out = cols @ kernels.reshape(k * d_in, d_out) + bias
    return ensure_finite(out, "conv1d_layer_axis")


def conv1d_layer_axis_backward(
    stack: Tensor, kernels: Tensor, grad_out: Tensor, stride: int, padding: int
) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Backward pass of :func:`conv1d_layer_axis`.

    Returns:
        (grad_kernels, grad_bias, grad_input)
    """
    k, d_in, d_out = kernels.shape
    length = stack.shape[-2]
    out_len = conv_output_length(length, k, stride, padding)
    if grad_out.shape[-2:] != (out_len, d_out):
        raise DimensionError(f"grad_out shape {grad_out.shape} does not match output (..., {out_len}, {d_out})")

    pad_width = [(0, 0)] * (stack.ndim - 2) + [(padding, padding), (0, 0)]
    padded = np.pad(stack, pad_width)
    patches = padded[..., _window_index(out_len, k, stride), :]
    cols = patches.reshape(-1, k * d_in)
    g_flat = grad_out.reshape(-1, d_out)

    grad_kernels = (cols.T @ g_flat).reshape(k, d_in, d_out)
    grad_bias = g_flat.sum(axis=0)

    g_patches = (grad_out @ kernels.reshape(k * d_in, d_out).T).reshape(
        grad_out.shape[:-1] + (k, d_in)
    )
    grad_padded = np.zeros_like(padded)
    positions = np.arange(out_len) * stride
    # for a fixed tap the strided positions are distinct, so += does not drop updates
    for tap in range(k):
        grad_padded[..., positions + tap, :] += g_patches[..., :, tap, :]
    grad_input = grad_padded[..., padding:padding + length, :]
    return grad_kernels, grad_bias, np.ascontiguousarray(grad_input)
