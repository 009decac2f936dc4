"""
Finite-difference verification of interface and head backward passes.

Each case composes interface -> head -> cross-entropy into one scalar and
compares every trainable coordinate and every input coordinate of the
hand-written gradients against central differences.
"""

import numpy as np

from collections import OrderedDict
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence

from heads.head import HeadKind, HeadParams, head_backward, head_forward, init_head
from heads.loss import ce_loss_grad
from interfaces.core import backward, fit, forward
from interfaces.params import InterfaceParams, init_params
from interfaces.spec import InterfaceKind, InterfaceSpec, output_dim
from interfaces.stack import LayerStack
from numerics.gradcheck import finite_diff_grad, relative_error
from numerics.tensor import Prng, Tensor, make_prng
from utils.logging_config import get_logger
from utils.settings_manager import get_setting

logger = get_logger(__name__)

NUM_CLASSES = 3
PARAM_SCALE = 0.5
PCA_FIT_FRAMES = 40
# Central differences at h=1e-5 carry roundoff near 1e-11, so the 1e-8
# floor would flag gradients that are exactly zero (e.g. attention key bias).
ERROR_FLOOR = 1e-6


@dataclass
class GradcheckResult:
    kind: InterfaceKind
    seed: int
    head: HeadKind
    passed: bool
    max_error: float
    worst: str

    def to_dict(self) -> Dict:
        return {
            "interface": self.kind.value,
            "seed": self.seed,
            "head": self.head.value,
            "passed": self.passed,
            "max_error": self.max_error,
            "worst": self.worst,
        }


def _randomize(values: "OrderedDict[str, Tensor]", rng: Prng) -> Dict[str, Tensor]:
    return {name: rng.normal(0.0, PARAM_SCALE, size=v.shape) for name, v in values.items()}


def _segments(num_frames: int) -> List[int]:
    """Two utterances when there are enough frames, else one."""
    if num_frames < 2:
        return [num_frames]
    first = num_frames // 2
    return [first, num_frames - first]


def check_case(
    spec: InterfaceSpec,
    head_kind: HeadKind,
    seed: int,
    num_layers: int = 5,
    num_frames: int = 7,
    dim: int = 8,
    tol: Optional[float] = None,
    step: Optional[float] = None,
) -> GradcheckResult:
    """Run one (interface, head, seed) comparison."""
    tol = tol if tol is not None else get_setting("gradcheck_tol", 1e-4)
    step = step if step is not None else get_setting("gradcheck_step", 1e-5)
    rng = make_prng(seed)

    interface = init_params(spec, num_layers, dim, rng)
    interface.update(_randomize(interface.trainable, rng))
    if interface.kind is InterfaceKind.PCA_CONCAT:
        fit(interface, [LayerStack(rng.standard_normal((num_layers, PCA_FIT_FRAMES, dim)))])
    d_out = output_dim(interface.spec, num_layers, dim)
    head = init_head(head_kind, d_out, NUM_CLASSES, rng)
    head.update(_randomize(head.tensors, rng))

    h = rng.standard_normal((num_layers, num_frames, dim))
    segments = _segments(num_frames) if head_kind is HeadKind.UTTERANCE else None
    label_count = len(segments) if segments is not None else num_frames
    labels = rng.integers(0, NUM_CLASSES, size=label_count)

    def loss_of(iface: InterfaceParams, head_params: HeadParams, h_values: Tensor) -> float:
        z, _ = forward(iface, LayerStack(h_values))
        logits, _ = head_forward(head_params, z, segments)
        return ce_loss_grad(logits, labels)[0]

    z, interface_cache = forward(interface, LayerStack(h))
    logits, head_cache = head_forward(head, z, segments)
    _, grad_logits = ce_loss_grad(logits, labels)
    head_grads, grad_z = head_backward(head, head_cache, grad_logits)
    interface_grads, grad_h = backward(interface, interface_cache, grad_z)

    errors: Dict[str, float] = {}

    def record(name: str, analytic: Tensor, numeric: Tensor) -> None:
        errors[name] = float(np.max(relative_error(analytic, numeric, floor=ERROR_FLOOR), initial=0.0))

    for name, value in interface.trainable.items():
        def f(x, name=name):
            trainable = OrderedDict(interface.trainable)
            trainable[name] = x
            return loss_of(replace(interface, trainable=trainable), head, h)
        record(f"interface.{name}", interface_grads[name], finite_diff_grad(f, value, step))

    for name, value in head.tensors.items():
        def g(x, name=name):
            tensors = OrderedDict(head.tensors)
            tensors[name] = x
            return loss_of(interface, replace(head, tensors=tensors), h)
        record(f"head.{name}", head_grads[name], finite_diff_grad(g, value, step))

    record("input", grad_h, finite_diff_grad(lambda x: loss_of(interface, head, x), h, step))

    worst = max(errors, key=errors.get)
    result = GradcheckResult(
        kind=interface.kind,
        seed=seed,
        head=head_kind,
        passed=errors[worst] <= tol,
        max_error=errors[worst],
        worst=worst,
    )
    logger.debug(f"gradcheck {result.kind.value}/{head_kind.value}/seed {seed}: max error {result.max_error:.3e} at {worst}")
    return result


def gradcheck_suite(
    kinds: Iterable[InterfaceKind | InterfaceSpec],
    num_layers: int = 5,
    num_frames: int = 7,
    dim: int = 8,
    seeds: Iterable[int] = range(5),
    tol: Optional[float] = None,
    heads: Sequence[HeadKind] = (HeadKind.FRAME, HeadKind.UTTERANCE),
) -> List[GradcheckResult]:
    """
    Check every (kind, seed, head) combination.

    Failures are returned as results, never raised.
    """
    specs = [k if isinstance(k, InterfaceSpec) else InterfaceSpec(kind=k) for k in kinds]
    seeds = list(seeds)
    results = []
    for spec in specs:
        for seed in seeds:
            for head_kind in heads:
                results.append(check_case(spec, head_kind, seed, num_layers, num_frames, dim, tol))
    failed = [r for r in results if not r.passed]
    logger.info(f"gradcheck: {len(results) - len(failed)}/{len(results)} cases passed")
    return results
