"""
Downstream head modules for LayerAgg.

Modules:
    head: Frame and utterance heads (linear or one hidden layer)
    loss: Softmax cross-entropy and accuracy
"""

__version__ = "1.0.0"

from .head import (
    HeadKind,
    HeadParams,
    head_backward,
    head_forward,
    head_param_count,
    init_head,
    matched_hidden_width,
)
from .loss import accuracy, ce_loss_grad

__all__ = [
    "HeadKind",
    "HeadParams",
    "head_backward",
    "head_forward",
    "head_param_count",
    "init_head",
    "matched_hidden_width",
    "accuracy",
    "ce_loss_grad",
]
