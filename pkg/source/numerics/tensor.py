"""
Dense tensor helpers and the seeded random generator.

Tensors are plain float64 numpy arrays in row-major (C) order.
"""

import numpy as np

from numpy.typing import NDArray
from typing import Sequence

from utils.errors import DimensionError, NonFiniteError

Tensor = NDArray[np.float64]
Prng = np.random.Generator


def make_prng(seed: int) -> Prng:
    """Create a PCG64-backed generator; equal seeds give equal streams."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def as_tensor(values, shape: Sequence[int] | None = None) -> Tensor:
    """Widen values to a contiguous float64 array, optionally reshaped."""
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape):
            raise DimensionError(f"Tensor extents must be >= 1, got {shape}")
        if arr.size != int(np.prod(shape)):
            raise DimensionError(f"Cannot view {arr.size} values as shape {shape}")
        arr = arr.reshape(shape)
    return arr


def flat_index(shape: Sequence[int], index: Sequence[int]) -> int:
    """Row-major flat offset of a multi-index."""
    if len(shape) != len(index):
        raise DimensionError(f"Index rank {len(index)} does not match shape rank {len(shape)}")
    offset = 0
    for extent, i in zip(shape, index):
        if not 0 <= i < extent:
            raise DimensionError(f"Index {tuple(index)} out of range for shape {tuple(shape)}")
        offset = offset * extent + i
    return offset


def ensure_finite(arr: Tensor, op: str) -> Tensor:
    """Raise NonFiniteError if a kernel produced NaN or Inf."""
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{op} produced non-finite values")
    return arr
