"""
Kind dispatch for interface forward and backward passes.
"""

import numpy as np

from types import ModuleType
from typing import Dict, Iterable, List, Optional, Tuple

from interfaces import cls_pool, concat_proj, grouped_ws, hier_conv, pca_concat, weighted_sum
from interfaces.params import ForwardCache, InterfaceParams
from interfaces.pca import PcaFit, fit_pca
from interfaces.spec import InterfaceKind, output_dim
from interfaces.stack import LayerStack, TimeFeatures
from numerics.tensor import Tensor, ensure_finite
from utils.errors import DimensionError, StateError

_KIND_MODULES: Dict[InterfaceKind, ModuleType] = {
    InterfaceKind.WEIGHTED_SUM: weighted_sum,
    InterfaceKind.GROUPED_WS: grouped_ws,
    InterfaceKind.CONCAT_PROJ: concat_proj,
    InterfaceKind.HIER_CONV: hier_conv,
    InterfaceKind.CLS_POOL: cls_pool,
    InterfaceKind.PCA_CONCAT: pca_concat,
}


def kind_module(kind: InterfaceKind) -> ModuleType:
    return _KIND_MODULES[kind]


def forward(params: InterfaceParams, stack: LayerStack) -> Tuple[TimeFeatures, ForwardCache]:
    """
    Apply the interface to a layer stack.

    Raises:
        DimensionError: If the stack does not match the bound (L, D)
        StateError: If a PCA interface has not been fitted
    """
    if (stack.num_layers, stack.dim) != (params.num_layers, params.dim):
        raise DimensionError(
            f"Stack dims (L={stack.num_layers}, D={stack.dim}) do not match "
            f"interface dims (L={params.num_layers}, D={params.dim})"
        )
    if not params.is_fitted:
        raise StateError(f"{params.kind.value} interface must be fitted before forward")

    module = kind_module(params.kind)
    z, data = module.forward(params.spec, params.trainable, params.buffers, stack.values)
    ensure_finite(z, f"{params.kind.value} forward")
    expected = (stack.num_frames, output_dim(params.spec, params.num_layers, params.dim))
    if z.shape != expected:
        raise DimensionError(f"{params.kind.value} emitted {z.shape}, expected {expected}")

    cache = ForwardCache(
        kind=params.kind,
        owner_id=id(params),
        version=params.version,
        input_shape=tuple(stack.values.shape),
        data=data,
    )
    return TimeFeatures(z), cache


def backward(params: InterfaceParams, cache: ForwardCache, grad_out: Tensor) -> Tuple[Dict[str, Tensor], Tensor]:
    """
    Vector-Jacobian products for every trainable tensor and for the input.

    Returns:
        (grad_params keyed like ``params.trainable``, grad_input of shape (L, T, D))

    Raises:
        StateError: If the cache belongs to another object or an older version
        DimensionError: If grad_out does not match the forward output
    """
    if cache.kind is not params.kind or cache.owner_id != id(params) or cache.version != params.version:
        raise StateError("Forward cache does not belong to the current interface parameters")
    num_frames = cache.input_shape[1]
    expected = (num_frames, output_dim(params.spec, params.num_layers, params.dim))
    if tuple(grad_out.shape) != expected:
        raise DimensionError(f"grad_out has shape {grad_out.shape}, expected {expected}")

    module = kind_module(params.kind)
    grads, grad_input = module.backward(params.spec, params.trainable, params.buffers, cache.data, grad_out)
    return grads, grad_input


def fit(params: InterfaceParams, stacks: Iterable[LayerStack]) -> Optional[PcaFit]:
    """Fit buffers for kinds that need them; no-op for the others."""
    if params.kind is not InterfaceKind.PCA_CONCAT:
        return None
    result = fit_pca(stacks, params.spec, params.num_layers, params.dim)
    params.set_buffers(result.buffers())
    return result


def effective_layer_weights(params: InterfaceParams) -> Optional[List[List[float]]]:
    """Normalized layer weights for the weighted-sum kinds, one list per group."""
    if params.kind is InterfaceKind.WEIGHTED_SUM:
        return [weighted_sum.layer_weights(params.spec, params.trainable).tolist()]
    if params.kind is InterfaceKind.GROUPED_WS:
        return [alpha.tolist() for alpha in grouped_ws.group_weights(params.spec, params.trainable)]
    return None
