"""
Interface kinds, per-kind settings and exact parameter accounting.
"""

import math

from collections import OrderedDict
from dataclasses import dataclass, replace, asdict
from enum import Enum
from typing import Dict, List, Optional, Tuple

from numerics.kernels import conv_output_length
from utils.errors import ConfigurationError, DegenerateWindowError


class InterfaceKind(Enum):
    """Enumeration of interface designs; values are the CLI names."""
    WEIGHTED_SUM = "weighted-sum"
    GROUPED_WS = "group-ws"
    CONCAT_PROJ = "concat-proj"
    HIER_CONV = "hier-conv"
    CLS_POOL = "cls-pool"
    PCA_CONCAT = "pca-concat"


class Normalization(Enum):
    """How weighted-sum layer weights are normalized."""
    SOFTMAX = "softmax"
    RAW = "raw"


HIER_CONV_KERNEL = 5
HIER_CONV_STRIDE = 3
HIER_CONV_PADDING = 1


@dataclass(frozen=True)
class InterfaceSpec:
    """
    An interface kind plus its settings.

    Settings that do not apply to ``kind`` are ignored. ``ffn_dim`` and
    ``pca_k`` default from (L, D) through :meth:`resolve`.
    """
    kind: InterfaceKind
    normalize: Normalization = Normalization.SOFTMAX
    num_groups: int = 2
    heads: int = 4
    ffn_dim: Optional[int] = None
    pca_k: Optional[int] = None
    conv_kernel: int = HIER_CONV_KERNEL
    conv_stride: int = HIER_CONV_STRIDE
    conv_padding: int = HIER_CONV_PADDING

    def resolve(self, num_layers: int, dim: int) -> "InterfaceSpec":
        """Fill in size-dependent defaults and validate against (L, D)."""
        resolved = self
        if self.kind is InterfaceKind.CLS_POOL and self.ffn_dim is None:
            resolved = replace(resolved, ffn_dim=default_ffn_dim(dim))
        if self.kind is InterfaceKind.PCA_CONCAT and self.pca_k is None:
            resolved = replace(resolved, pca_k=math.ceil(dim / num_layers))
        validate(resolved, num_layers, dim)
        return resolved

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["kind"] = self.kind.value
        data["normalize"] = self.normalize.value
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "InterfaceSpec":
        data = dict(data)
        data["kind"] = InterfaceKind(data["kind"])
        data["normalize"] = Normalization(data.get("normalize", "softmax"))
        return cls(**data)


def default_ffn_dim(dim: int) -> int:
    return 2048 if dim == 768 else int(round(8 * dim / 3))


def validate(spec: InterfaceSpec, num_layers: int, dim: int) -> None:
    """
    Check the per-kind invariants against (L, D).

    Raises:
        ConfigurationError: On any violation
    """
    if num_layers < 1 or dim < 1:
        raise ConfigurationError(f"Layer count and dimension must be >= 1, got L={num_layers}, D={dim}")
    kind = spec.kind
    if kind is InterfaceKind.GROUPED_WS:
        if not 1 <= spec.num_groups <= num_layers:
            raise ConfigurationError(f"Group count {spec.num_groups} must lie in [1, L={num_layers}]")
    elif kind is InterfaceKind.CLS_POOL:
        if spec.heads < 1 or dim % spec.heads != 0:
            raise ConfigurationError(f"Head count {spec.heads} must divide D={dim}")
        ffn = spec.ffn_dim if spec.ffn_dim is not None else default_ffn_dim(dim)
        if ffn < 1:
            raise ConfigurationError(f"Feed-forward width must be >= 1, got {ffn}")
    elif kind is InterfaceKind.PCA_CONCAT:
        k = spec.pca_k if spec.pca_k is not None else math.ceil(dim / num_layers)
        if not 1 <= k <= dim:
            raise ConfigurationError(f"Components per layer {k} must lie in [1, D={dim}]")
    elif kind is InterfaceKind.HIER_CONV:
        hierconv_plan(num_layers, spec.conv_kernel, spec.conv_stride, spec.conv_padding)


def hierconv_depth(num_layers: int) -> int:
    """max(1, floor(log3 L)), computed in integers."""
    depth, power = 0, 3
    while power <= num_layers:
        depth += 1
        power *= 3
    return max(1, depth)


def hierconv_plan(
    num_layers: int,
    kernel: int = HIER_CONV_KERNEL,
    stride: int = HIER_CONV_STRIDE,
    padding: int = HIER_CONV_PADDING,
) -> Tuple[int, List[int]]:
    """
    Depth and layer-extent schedule of the hierarchical convolution.

    Returns:
        (depth, [L, L_1, ..., L_depth])

    Raises:
        DegenerateWindowError: If some convolution window does not fit
    """
    if num_layers < 1:
        raise ConfigurationError(f"Layer count must be >= 1, got {num_layers}")
    depth = hierconv_depth(num_layers)
    schedule = [num_layers]
    for _ in range(depth):
        try:
            schedule.append(conv_output_length(schedule[-1], kernel, stride, padding))
        except DegenerateWindowError as e:
            raise DegenerateWindowError(
                f"Hierarchical convolution cannot reduce L={num_layers}: {e}"
            ) from e
    return depth, schedule


def group_sizes(num_layers: int, num_groups: int) -> List[int]:
    """Contiguous group sizes, earlier groups one larger on remainder."""
    base, rem = divmod(num_layers, num_groups)
    return [base + 1 if g < rem else base for g in range(num_groups)]


def group_slices(num_layers: int, num_groups: int) -> List[slice]:
    slices, start = [], 0
    for size in group_sizes(num_layers, num_groups):
        slices.append(slice(start, start + size))
        start += size
    return slices


def output_dim(spec: InterfaceSpec, num_layers: int, dim: int) -> int:
    """Feature dimension emitted by the interface."""
    spec = spec.resolve(num_layers, dim)
    if spec.kind is InterfaceKind.PCA_CONCAT:
        return num_layers * spec.pca_k
    return dim


def param_count(spec: InterfaceSpec, num_layers: int, dim: int) -> int:
    """Closed-form number of trainable scalars."""
    spec = spec.resolve(num_layers, dim)
    L, D = num_layers, dim
    kind = spec.kind
    if kind is InterfaceKind.WEIGHTED_SUM:
        return L
    if kind is InterfaceKind.GROUPED_WS:
        return L + spec.num_groups * D * D + D
    if kind is InterfaceKind.CONCAT_PROJ:
        return L * D * D + D
    if kind is InterfaceKind.HIER_CONV:
        depth = hierconv_depth(L)
        return depth * (spec.conv_kernel * D * D + D)
    if kind is InterfaceKind.CLS_POOL:
        F = spec.ffn_dim
        return D + (4 * D * D + 4 * D) + (2 * D * F + F + D) + 4 * D
    return 0


def parameter_shapes(spec: InterfaceSpec, num_layers: int, dim: int) -> "OrderedDict[str, Tuple[int, ...]]":
    """Trainable tensor names and shapes in declaration order."""
    spec = spec.resolve(num_layers, dim)
    L, D = num_layers, dim
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    kind = spec.kind
    if kind is InterfaceKind.WEIGHTED_SUM:
        shapes["weights"] = (L,)
    elif kind is InterfaceKind.GROUPED_WS:
        shapes["weights"] = (L,)
        shapes["proj_weight"] = (spec.num_groups * D, D)
        shapes["proj_bias"] = (D,)
    elif kind is InterfaceKind.CONCAT_PROJ:
        shapes["proj_weight"] = (L * D, D)
        shapes["proj_bias"] = (D,)
    elif kind is InterfaceKind.HIER_CONV:
        for i in range(hierconv_depth(L)):
            shapes[f"conv{i}_kernel"] = (spec.conv_kernel, D, D)
            shapes[f"conv{i}_bias"] = (D,)
    elif kind is InterfaceKind.CLS_POOL:
        F = spec.ffn_dim
        shapes["cls"] = (D,)
        for name in ("q", "k", "v", "out"):
            shapes[f"{name}_weight"] = (D, D)
            shapes[f"{name}_bias"] = (D,)
        shapes["ln1_gamma"] = (D,)
        shapes["ln1_beta"] = (D,)
        shapes["ffn1_weight"] = (D, F)
        shapes["ffn1_bias"] = (F,)
        shapes["ffn2_weight"] = (F, D)
        shapes["ffn2_bias"] = (D,)
        shapes["ln2_gamma"] = (D,)
        shapes["ln2_beta"] = (D,)
    return shapes


def buffer_shapes(spec: InterfaceSpec, num_layers: int, dim: int) -> "OrderedDict[str, Tuple[int, ...]]":
    """Fitted (non-trainable) tensor names and shapes."""
    spec = spec.resolve(num_layers, dim)
    shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
    if spec.kind is InterfaceKind.PCA_CONCAT:
        shapes["pca_mean"] = (num_layers, dim)
        shapes["pca_basis"] = (num_layers, dim, spec.pca_k)
    return shapes
