"""
Interface parameter store and initialization.
"""

import numpy as np

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

from interfaces.spec import InterfaceKind, InterfaceSpec, buffer_shapes, parameter_shapes
from numerics.tensor import Prng, Tensor
from utils.errors import ConfigurationError

CLS_INIT_STD = 0.02


@dataclass
class InterfaceParams:
    """
    Trainable tensors, fitted buffers and gradient slots of one interface.

    ``version`` increases whenever the trainable tensors are replaced, so a
    forward cache can tell whether it is stale.
    """
    spec: InterfaceSpec
    num_layers: int
    dim: int
    trainable: "OrderedDict[str, Tensor]"
    buffers: "OrderedDict[str, Tensor]" = field(default_factory=OrderedDict)
    grads: "OrderedDict[str, Tensor]" = field(default_factory=OrderedDict)
    version: int = 0

    @property
    def kind(self) -> InterfaceKind:
        return self.spec.kind

    @property
    def is_fitted(self) -> bool:
        return all(name in self.buffers for name in buffer_shapes(self.spec, self.num_layers, self.dim))

    def allocated_count(self) -> int:
        """Number of scalars actually held in trainable tensors."""
        return int(sum(t.size for t in self.trainable.values()))

    def zero_grads(self) -> None:
        self.grads = OrderedDict((name, np.zeros_like(t)) for name, t in self.trainable.items())

    def update(self, new_values: Dict[str, Tensor]) -> None:
        """Replace trainable tensors (shapes must match) and invalidate caches."""
        for name, value in new_values.items():
            if name not in self.trainable or self.trainable[name].shape != value.shape:
                raise ConfigurationError(f"Unknown or mis-shaped interface parameter '{name}'")
            self.trainable[name] = np.asarray(value, dtype=np.float64)
        self.version += 1

    def set_buffers(self, buffers: Dict[str, Tensor]) -> None:
        expected = buffer_shapes(self.spec, self.num_layers, self.dim)
        for name, shape in expected.items():
            if name not in buffers or tuple(buffers[name].shape) != shape:
                raise ConfigurationError(f"Buffer '{name}' missing or not of shape {shape}")
        self.buffers = OrderedDict((name, np.asarray(buffers[name], dtype=np.float64)) for name in expected)
        self.version += 1


@dataclass
class ForwardCache:
    """Intermediates kept by a forward pass for the matching backward pass."""
    kind: InterfaceKind
    owner_id: int
    version: int
    input_shape: Tuple[int, int, int]
    data: Dict[str, Any]


def _init_tensor(name: str, shape: Tuple[int, ...], rng: Prng) -> Tensor:
    if name == "weights" or name.endswith("_bias") or name.endswith("_beta"):
        return np.zeros(shape)
    if name.endswith("_gamma"):
        return np.ones(shape)
    if name == "cls":
        return rng.normal(0.0, CLS_INIT_STD, size=shape)
    fan_in = int(np.prod(shape[:-1]))
    return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)


def init_params(spec: InterfaceSpec, num_layers: int, dim: int, rng: Prng) -> InterfaceParams:
    """
    Allocate and initialize an interface.

    Layer weights start at zero (uniform after softmax), matrices and
    kernels at normal(0, 1/fan_in), biases at zero, layer-norm gains at one
    and the CLS embedding at normal(0, 0.02). Draws follow declaration order.
    """
    spec = spec.resolve(num_layers, dim)
    trainable = OrderedDict(
        (name, _init_tensor(name, shape, rng))
        for name, shape in parameter_shapes(spec, num_layers, dim).items()
    )
    params = InterfaceParams(spec=spec, num_layers=num_layers, dim=dim, trainable=trainable)
    params.zero_grads()
    return params
