"""
LIF layer-feature files.

Layout (little-endian): magic "LIF1", u32 version=1, u32 L, u32 T, u32 D,
u32 dtype=1 (float32), then L*T*D float32 values with l outermost and d
innermost.
"""

import os
import struct
import numpy as np

from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

from interfaces.stack import LayerStack
from utils.errors import FormatError

LIF_MAGIC = b"LIF1"
LIF_VERSION = 1
LIF_DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<4sIIIII")


@dataclass(frozen=True)
class LifHeader:
    num_layers: int
    num_frames: int
    dim: int

    @property
    def payload_count(self) -> int:
        return self.num_layers * self.num_frames * self.dim


def _read_header(handle: BinaryIO, path: str) -> LifHeader:
    raw = handle.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} of {_HEADER.size} bytes)")
    magic, version, num_layers, num_frames, dim, dtype = _HEADER.unpack(raw)
    if magic != LIF_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != LIF_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype != LIF_DTYPE_FLOAT32:
        raise FormatError(f"{path}: unsupported dtype code {dtype}")
    if min(num_layers, num_frames, dim) < 1:
        raise FormatError(f"{path}: empty dimensions L={num_layers}, T={num_frames}, D={dim}")
    return LifHeader(num_layers, num_frames, dim)


def read_lif_header(path: str | Path) -> LifHeader:
    with open(path, "rb") as handle:
        return _read_header(handle, str(path))


def write_lif(stack: LayerStack, path: str | Path) -> None:
    """Write a stack as float32 (values are narrowed)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(LIF_MAGIC, LIF_VERSION, stack.num_layers, stack.num_frames, stack.dim, LIF_DTYPE_FLOAT32)
    payload = np.ascontiguousarray(stack.values, dtype="<f4").tobytes()
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(payload)


def read_lif_raw(path: str | Path) -> np.ndarray:
    """Read the float32 payload as stored, shaped (L, T, D)."""
    with open(path, "rb") as handle:
        header = _read_header(handle, str(path))
        expected = header.payload_count * 4
        available = os.fstat(handle.fileno()).st_size - _HEADER.size
        if available < expected:
            raise FormatError(
                f"{path}: truncated payload ({available // 4} of {header.payload_count} floats)"
            )
        payload = handle.read(expected)
    if len(payload) < expected:
        raise FormatError(f"{path}: payload ended early ({len(payload) // 4} of {header.payload_count} floats)")
    return np.frombuffer(payload, dtype="<f4").reshape(header.num_layers, header.num_frames, header.dim)


def read_lif(path: str | Path) -> LayerStack:
    """Read a LIF file, widening the payload to float64."""
    return LayerStack(read_lif_raw(path).astype(np.float64))
