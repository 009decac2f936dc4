"""
Downstream prediction heads.

A head maps interface features to class logits, either per frame or per
utterance (mean over the utterance's frames first). The default head is
linear; ``hidden_dim > 0`` inserts one gelu hidden layer.
"""

import numpy as np

from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

from interfaces.stack import TimeFeatures
from numerics.kernels import gelu, gelu_backward
from numerics.tensor import Prng, Tensor, ensure_finite
from utils.errors import ConfigurationError, DimensionError, StateError


class HeadKind(Enum):
    """Label granularity of a head."""
    FRAME = "frame"
    UTTERANCE = "utterance"


@dataclass
class HeadParams:
    """Head tensors keyed by name, in declaration order."""
    kind: HeadKind
    in_dim: int
    num_classes: int
    hidden_dim: int = 0
    tensors: "OrderedDict[str, Tensor]" = field(default_factory=OrderedDict)
    version: int = 0

    @property
    def weight(self) -> Tensor:
        return self.tensors["weight"]

    @property
    def bias(self) -> Tensor:
        return self.tensors["bias"]

    def allocated_count(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def update(self, new_values: Dict[str, Tensor]) -> None:
        for name, value in new_values.items():
            if name not in self.tensors or self.tensors[name].shape != value.shape:
                raise ConfigurationError(f"Unknown or mis-shaped head parameter '{name}'")
            self.tensors[name] = np.asarray(value, dtype=np.float64)
        self.version += 1


@dataclass
class HeadCache:
    owner_id: int
    version: int
    inputs: Tensor
    hidden_pre: Optional[Tensor]
    features: Tensor
    counts: Optional[np.ndarray]


def head_shapes(in_dim: int, num_classes: int, hidden_dim: int = 0) -> "OrderedDict[str, Tuple[int, ...]]":
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    width = in_dim
    if hidden_dim > 0:
        shapes["hidden_weight"] = (in_dim, hidden_dim)
        shapes["hidden_bias"] = (hidden_dim,)
        width = hidden_dim
    shapes["weight"] = (width, num_classes)
    shapes["bias"] = (num_classes,)
    return shapes


def head_param_count(in_dim: int, num_classes: int, hidden_dim: int = 0) -> int:
    if hidden_dim > 0:
        return in_dim * hidden_dim + hidden_dim + hidden_dim * num_classes + num_classes
    return in_dim * num_classes + num_classes


def init_head(kind: HeadKind, in_dim: int, num_classes: int, rng: Prng, hidden_dim: int = 0) -> HeadParams:
    """Weights at normal(0, 1/fan_in), biases at zero."""
    if num_classes < 2:
        raise ConfigurationError(f"A head needs at least 2 classes, got {num_classes}")
    if in_dim < 1 or hidden_dim < 0:
        raise ConfigurationError(f"Invalid head sizes: in_dim={in_dim}, hidden_dim={hidden_dim}")
    tensors = OrderedDict()
    for name, shape in head_shapes(in_dim, num_classes, hidden_dim).items():
        if name.endswith("bias"):
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = rng.normal(0.0, 1.0 / np.sqrt(shape[0]), size=shape)
    return HeadParams(kind=kind, in_dim=in_dim, num_classes=num_classes, hidden_dim=hidden_dim, tensors=tensors)


def matched_hidden_width(target_total: int, interface_count: int, in_dim: int, num_classes: int) -> int:
    """Hidden width whose interface + head total lands closest to ``target_total``."""
    per_unit = in_dim + 1 + num_classes
    width = int(round((target_total - interface_count - num_classes) / per_unit))
    return max(1, width)


def head_forward(
    params: HeadParams, z: TimeFeatures, segments: Optional[Sequence[int]] = None
) -> Tuple[Tensor, HeadCache]:
    """
    Compute logits.

    Args:
        params: Head parameters
        z: Interface output (T, D_in)
        segments: Frame counts of the utterances concatenated in ``z``
            (utterance heads only; defaults to one utterance)

    Returns:
        (logits, cache): logits are (T, C) for frame heads and (B, C) for utterance heads
    """
    values = z.values
    if values.shape[1] != params.in_dim:
        raise DimensionError(f"Head expects D_in={params.in_dim}, got {values.shape[1]}")

    counts = None
    if params.kind is HeadKind.UTTERANCE:
        counts = np.asarray(segments if segments is not None else [values.shape[0]], dtype=np.int64)
        if np.any(counts < 1) or counts.sum() != values.shape[0]:
            raise DimensionError(f"Segments {counts.tolist()} do not cover {values.shape[0]} frames")
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        inputs = np.add.reduceat(values, starts, axis=0) / counts[:, None]
    else:
        inputs = values

    hidden_pre = None
    features = inputs
    if params.hidden_dim > 0:
        hidden_pre = inputs @ params.tensors["hidden_weight"] + params.tensors["hidden_bias"]
        features = gelu(hidden_pre)

    logits = ensure_finite(features @ params.weight + params.bias, "head_forward")
    cache = HeadCache(
        owner_id=id(params), version=params.version, inputs=inputs,
        hidden_pre=hidden_pre, features=features, counts=counts,
    )
    return logits, cache


def head_backward(params: HeadParams, cache: HeadCache, grad_logits: Tensor) -> Tuple[Dict[str, Tensor], Tensor]:
    """
    Returns:
        (grads keyed like ``params.tensors``, grad_z of shape (T, D_in))
    """
    if cache.owner_id != id(params) or cache.version != params.version:
        raise StateError("Head cache does not belong to the current head parameters")
    grads: Dict[str, Tensor] = {
        "weight": cache.features.T @ grad_logits,
        "bias": grad_logits.sum(axis=0),
    }
    grad_inputs = grad_logits @ params.weight.T
    if params.hidden_dim > 0:
        grad_pre = gelu_backward(cache.hidden_pre, grad_inputs)
        grads["hidden_weight"] = cache.inputs.T @ grad_pre
        grads["hidden_bias"] = grad_pre.sum(axis=0)
        grad_inputs = grad_pre @ params.tensors["hidden_weight"].T

    if cache.counts is not None:
        grad_z = np.repeat(grad_inputs / cache.counts[:, None], cache.counts, axis=0)
    else:
        grad_z = grad_inputs
    ordered = OrderedDict((name, grads[name]) for name in params.tensors)
    return ordered, grad_z
