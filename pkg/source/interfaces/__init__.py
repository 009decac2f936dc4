"""
Interface modules for LayerAgg.

This package provides the six designs that aggregate an upstream layer
stack (L, T, D) into frame features (T, D_out), with exact backward passes
and parameter accounting.

Modules:
    spec: Interface kinds, settings, output sizes and parameter counts
    stack: LayerStack and TimeFeatures containers
    params: Parameter store, forward caches and initialization
    core: Kind dispatch for forward, backward and fitting
    weighted_sum, grouped_ws, concat_proj, hier_conv, cls_pool, pca_concat: Per-kind math
    pca: Streaming per-layer PCA
"""

__version__ = "1.0.0"

from .spec import (
    InterfaceKind,
    InterfaceSpec,
    Normalization,
    hierconv_plan,
    output_dim,
    param_count,
)
from .stack import LayerStack, TimeFeatures
from .params import InterfaceParams, init_params
from .core import forward, backward, fit, effective_layer_weights
from .pca import PcaFit, fit_pca

__all__ = [
    "InterfaceKind",
    "InterfaceSpec",
    "Normalization",
    "hierconv_plan",
    "output_dim",
    "param_count",
    "LayerStack",
    "TimeFeatures",
    "InterfaceParams",
    "init_params",
    "forward",
    "backward",
    "fit",
    "effective_layer_weights",
    "PcaFit",
    "fit_pca",
]
