"""
Interface input and output containers.
"""

import numpy as np

from dataclasses import dataclass
from typing import Sequence

from numerics.tensor import Tensor
from utils.errors import DimensionError, NonFiniteError


@dataclass(frozen=True)
class LayerStack:
    """Upstream hidden states h with shape (L, T, D)."""
    values: Tensor

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 3 or min(values.shape) < 1:
            raise DimensionError(f"LayerStack needs shape (L, T, D) with extents >= 1, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("LayerStack contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def num_layers(self) -> int:
        return self.values.shape[0]

    @property
    def num_frames(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    @classmethod
    def concat_frames(cls, stacks: Sequence["LayerStack"]) -> "LayerStack":
        """Join utterances along the frame axis (interfaces act per frame)."""
        if not stacks:
            raise DimensionError("Cannot concatenate an empty list of stacks")
        shape = (stacks[0].num_layers, stacks[0].dim)
        for stack in stacks:
            if (stack.num_layers, stack.dim) != shape:
                raise DimensionError(f"Stack dims {(stack.num_layers, stack.dim)} differ from {shape}")
        return cls(np.concatenate([s.values for s in stacks], axis=1))


@dataclass(frozen=True)
class TimeFeatures:
    """Interface output z with shape (T, D_out)."""
    values: Tensor

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionError(f"TimeFeatures needs shape (T, D_out), got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]
