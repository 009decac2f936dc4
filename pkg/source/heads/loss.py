"""Cross-entropy loss and accuracy over class logits."""

import numpy as np

from typing import Tuple

from numerics.tensor import Tensor
from utils.errors import DataError, DimensionError


def _check_labels(logits: Tensor, labels) -> np.ndarray:
    labels = np.asarray(labels)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError(f"Labels {labels.shape} do not match logits {logits.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise DataError(f"Labels must lie in [0, {logits.shape[1]}), got range [{labels.min()}, {labels.max()}]")
    return labels.astype(np.int64)


def ce_loss_grad(logits: Tensor, labels) -> Tuple[float, Tensor]:
    """Mean softmax cross-entropy over rows and its gradient (softmax - one_hot) / N."""
    labels = _check_labels(logits, labels)
    count = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    rows = np.arange(count)
    loss = float(-log_probs[rows, labels].mean())

    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    return loss, grad / count


def accuracy(logits: Tensor, labels) -> float:
    """Argmax match rate; ties go to the lowest class index."""
    labels = _check_labels(logits, labels)
    if labels.size == 0:
        return 0.0
    return float(np.mean(np.argmax(logits, axis=1) == labels))
