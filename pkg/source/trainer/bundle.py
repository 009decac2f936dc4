"""
LIM model bundles.

Layout (little-endian): magic "LIM1", u32 version=1, u32 byte length of a
UTF-8 JSON config blob, the blob, then every tensor as float64 in
declaration order: interface trainables, interface buffers, head tensors.
"""

import json
import struct
import numpy as np

from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

from heads.head import HeadKind, HeadParams, head_shapes
from interfaces.params import InterfaceParams
from interfaces.spec import InterfaceSpec, buffer_shapes, parameter_shapes
from utils.errors import FormatError
from utils.logging_config import get_logger

logger = get_logger(__name__)

LIM_MAGIC = b"LIM1"
LIM_VERSION = 1
_PREFIX = struct.Struct("<4sII")


@dataclass
class ModelBundle:
    """A trained interface and head."""
    interface: InterfaceParams
    head: HeadParams

    def config(self) -> Dict:
        return {
            "interface": self.interface.spec.to_dict(),
            "layers": self.interface.num_layers,
            "dim": self.interface.dim,
            "head": {
                "kind": self.head.kind.value,
                "in_dim": self.head.in_dim,
                "classes": self.head.num_classes,
                "hidden": self.head.hidden_dim,
            },
        }

    def tensors(self) -> List[Tuple[str, np.ndarray]]:
        named = [(f"interface.{k}", v) for k, v in self.interface.trainable.items()]
        named += [(f"buffer.{k}", v) for k, v in self.interface.buffers.items()]
        named += [(f"head.{k}", v) for k, v in self.head.tensors.items()]
        return named


def save_bundle(bundle: ModelBundle, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    config = bundle.config()
    config["fitted"] = bool(bundle.interface.buffers)
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(_PREFIX.pack(LIM_MAGIC, LIM_VERSION, len(blob)))
        handle.write(blob)
        for _, value in bundle.tensors():
            handle.write(np.ascontiguousarray(value, dtype="<f8").tobytes())
    logger.info(f"Saved model bundle to {path}")
    return path


def _take(payload: memoryview, offset: int, shape: Tuple[int, ...], path: Path) -> Tuple[np.ndarray, int]:
    count = int(np.prod(shape)) if shape else 1
    end = offset + 8 * count
    if end > len(payload):
        raise FormatError(f"{path}: truncated tensor payload")
    value = np.frombuffer(payload[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
    return value, end


def load_bundle(path: str | Path) -> ModelBundle:
    """
    Raises:
        FormatError: On a bad prefix, config blob or tensor payload
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _PREFIX.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, blob_length = _PREFIX.unpack_from(data)
    if magic != LIM_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != LIM_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    blob_end = _PREFIX.size + blob_length
    if blob_end > len(data):
        raise FormatError(f"{path}: truncated config blob")
    try:
        config = json.loads(data[_PREFIX.size:blob_end].decode("utf-8"))
        spec = InterfaceSpec.from_dict(config["interface"])
        num_layers, dim = int(config["layers"]), int(config["dim"])
        head_config = config["head"]
        head_kind = HeadKind(head_config["kind"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{path}: invalid config blob ({e})") from e

    payload = memoryview(data)
    offset = blob_end
    trainable: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for name, shape in parameter_shapes(spec, num_layers, dim).items():
        trainable[name], offset = _take(payload, offset, shape, path)
    buffers: "OrderedDict[str, np.ndarray]" = OrderedDict()
    if config.get("fitted"):
        for name, shape in buffer_shapes(spec, num_layers, dim).items():
            buffers[name], offset = _take(payload, offset, shape, path)
    head_tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for name, shape in head_shapes(head_config["in_dim"], head_config["classes"], head_config["hidden"]).items():
        head_tensors[name], offset = _take(payload, offset, shape, path)
    if offset != len(data):
        raise FormatError(f"{path}: {len(data) - offset} trailing bytes")

    interface = InterfaceParams(spec=spec, num_layers=num_layers, dim=dim, trainable=trainable, buffers=buffers)
    interface.zero_grads()
    head = HeadParams(
        kind=head_kind,
        in_dim=head_config["in_dim"],
        num_classes=head_config["classes"],
        hidden_dim=head_config["hidden"],
        tensors=head_tensors,
    )
    return ModelBundle(interface=interface, head=head)
