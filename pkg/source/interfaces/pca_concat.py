"""
PCA + concatenation: z_t = concat_l U_l^T (h_{l,t} - mu_l).

No trainable parameters; the per-layer means and bases come from
:func:`interfaces.pca.fit_pca`.
"""

import numpy as np

from collections import OrderedDict
from typing import Dict, Tuple

from interfaces.spec import InterfaceSpec
from numerics.tensor import Tensor


def forward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], h: Tensor) -> Tuple[Tensor, Dict]:
    mean, basis = buffers["pca_mean"], buffers["pca_basis"]
    projected = np.einsum("ltd,ldk->tlk", h - mean[:, None, :], basis)
    num_frames = h.shape[1]
    return projected.reshape(num_frames, -1), {"shape": h.shape}


def backward(spec: InterfaceSpec, trainable: Dict[str, Tensor], buffers: Dict[str, Tensor], cache: Dict, grad_z: Tensor):
    num_layers, num_frames, _ = cache["shape"]
    basis = buffers["pca_basis"]
    grad_proj = grad_z.reshape(num_frames, num_layers, basis.shape[2])
    grad_h = np.einsum("tlk,ldk->ltd", grad_proj, basis)
    return OrderedDict(), grad_h
