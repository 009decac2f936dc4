"""
Training and evaluation of an interface joined to a head.

Upstream features are frozen: only interface and head parameters change,
and the dataset checksum is verified after every epoch.
"""

import time
import numpy as np

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from data.dataset import FeatureDataset
from data.manifest import DatasetManifest, load_manifest
from heads.head import HeadKind, head_backward, head_forward, head_param_count, init_head
from heads.loss import ce_loss_grad
from interfaces.core import backward, effective_layer_weights, fit, forward
from interfaces.params import init_params
from interfaces.spec import InterfaceSpec, output_dim, param_count
from numerics.tensor import make_prng
from trainer.bundle import ModelBundle
from trainer.optim import AdamState, OptimizerKind, adam_step, gd_step
from utils.errors import ConfigurationError, DataError, DivergenceError, NonFiniteError, StateError
from utils.logging_config import get_logger
from utils.settings_manager import get_setting

logger = get_logger(__name__)

EVAL_BATCH_SIZE = 256


@dataclass
class TrainConfig:
    interface: InterfaceSpec
    head_kind: HeadKind
    num_classes: int
    train_manifest: Optional[str] = None
    test_manifest: Optional[str] = None
    epochs: int = field(default_factory=lambda: get_setting("epochs", 30))
    batch_size: int = field(default_factory=lambda: get_setting("batch_size", 32))
    learning_rate: float = field(default_factory=lambda: get_setting("learning_rate", 1e-3))
    optimizer: OptimizerKind = OptimizerKind.ADAM
    seed: int = field(default_factory=lambda: get_setting("seed", 0))
    head_hidden: int = 0

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: If a hyperparameter is out of range
        """
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.head_hidden < 0:
            raise ConfigurationError(f"head_hidden must be >= 0, got {self.head_hidden}")

    def to_dict(self) -> Dict:
        return {
            "interface": self.interface.to_dict(),
            "head": self.head_kind.value,
            "head_hidden": self.head_hidden,
            "classes": self.num_classes,
            "train_manifest": self.train_manifest,
            "test_manifest": self.test_manifest,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer.value,
            "seed": self.seed,
        }


@dataclass
class TrainReport:
    epoch_losses: List[float]
    epoch_accuracies: List[float]
    test_accuracy: float
    test_loss: float
    interface_params: int
    head_params: int
    seed: int
    config: Dict
    layer_weights: Optional[List[List[float]]] = None
    wall_clock_seconds: float = 0.0

    @property
    def total_params(self) -> int:
        return self.interface_params + self.head_params

    def to_dict(self, include_timing: bool = False) -> Dict:
        """JSON-ready report; wall-clock is left out unless asked for."""
        data = {
            "epoch_losses": self.epoch_losses,
            "epoch_accuracies": self.epoch_accuracies,
            "test_accuracy": self.test_accuracy,
            "test_loss": self.test_loss,
            "interface_params": self.interface_params,
            "head_params": self.head_params,
            "total_params": self.total_params,
            "seed": self.seed,
            "config": self.config,
            "layer_weights": self.layer_weights,
        }
        if include_timing:
            data["wall_clock_seconds"] = self.wall_clock_seconds
        return data


@dataclass
class EvalResult:
    accuracy: float
    loss: float
    count: int

    def to_dict(self) -> Dict:
        return {"accuracy": self.accuracy, "loss": self.loss, "count": self.count}


def _check_labels(dataset: FeatureDataset, head_kind: HeadKind, num_classes: int, name: str) -> None:
    if len(dataset) == 0:
        raise DataError(f"The {name} set is empty")
    if dataset.frame_level != (head_kind is HeadKind.FRAME):
        form = "frame" if dataset.frame_level else "utterance"
        raise DataError(f"The {name} set has {form} labels but the head is '{head_kind.value}'")
    if dataset.max_label >= num_classes:
        raise DataError(f"The {name} set has class id {dataset.max_label} but only {num_classes} classes")


def _load(manifest_path: Optional[str], name: str) -> FeatureDataset:
    if manifest_path is None:
        raise ConfigurationError(f"No {name} manifest given")
    return FeatureDataset.from_manifest(load_manifest(manifest_path))


def train(config: TrainConfig) -> Tuple[TrainReport, ModelBundle]:
    """
    Train on ``config.train_manifest`` and score on ``config.test_manifest``.

    Returns:
        (report, trained bundle)

    Raises:
        DataError: On empty or inconsistent datasets
        DivergenceError: If a training loss becomes non-finite
    """
    config.validate()
    train_set = _load(config.train_manifest, "training")
    test_set = _load(config.test_manifest, "test")
    return train_on_datasets(config, train_set, test_set)


def train_on_datasets(
    config: TrainConfig, train_set: FeatureDataset, test_set: FeatureDataset
) -> Tuple[TrainReport, ModelBundle]:
    config.validate()
    _check_labels(train_set, config.head_kind, config.num_classes, "training")
    _check_labels(test_set, config.head_kind, config.num_classes, "test")
    num_layers, dim = train_set.dims
    started = time.perf_counter()

    rng = make_prng(config.seed)
    interface = init_params(config.interface, num_layers, dim, rng)
    d_out = output_dim(interface.spec, num_layers, dim)
    head = init_head(config.head_kind, d_out, config.num_classes, rng, hidden_dim=config.head_hidden)

    interface_count = param_count(interface.spec, num_layers, dim)
    if interface_count != interface.allocated_count():
        raise StateError(
            f"{interface.kind.value} reports {interface_count} parameters but holds {interface.allocated_count()}"
        )
    head_count = head_param_count(d_out, config.num_classes, config.head_hidden)
    logger.info(
        f"Training {interface.kind.value} (L={num_layers}, D={dim}, {interface_count} params) "
        f"with {config.head_kind.value} head ({head_count} params) on {len(train_set)} utterances"
    )

    if fit(interface, train_set.stacks) is not None:
        logger.info("Fitted PCA buffers on the training set")

    checksum = train_set.checksum()
    adam = AdamState(
        beta1=get_setting("adam_beta1", 0.9),
        beta2=get_setting("adam_beta2", 0.999),
        eps=get_setting("adam_eps", 1e-8),
    )
    step = 0
    epoch_losses: List[float] = []
    epoch_accuracies: List[float] = []

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_set))
        loss_sum, correct, seen = 0.0, 0, 0
        for start in range(0, len(order), config.batch_size):
            batch = train_set.batch(order[start:start + config.batch_size])
            try:
                z, interface_cache = forward(interface, batch.stack)
                logits, head_cache = head_forward(head, z, batch.segments)
            except NonFiniteError as e:
                raise DivergenceError(epoch, float("nan")) from e
            loss, grad_logits = ce_loss_grad(logits, batch.labels)
            if not np.isfinite(loss):
                raise DivergenceError(epoch, loss)
            head_grads, grad_z = head_backward(head, head_cache, grad_logits)
            interface_grads, _ = backward(interface, interface_cache, grad_z)

            count = len(batch.labels)
            loss_sum += loss * count
            correct += int(np.sum(np.argmax(logits, axis=1) == batch.labels))
            seen += count

            values = {f"interface.{k}": v for k, v in interface.trainable.items()}
            values.update({f"head.{k}": v for k, v in head.tensors.items()})
            grads = {f"interface.{k}": v for k, v in interface_grads.items()}
            grads.update({f"head.{k}": v for k, v in head_grads.items()})
            step += 1
            if config.optimizer is OptimizerKind.ADAM:
                values, adam = adam_step(values, grads, adam, config.learning_rate, step)
            else:
                values = gd_step(values, grads, config.learning_rate)
            interface.update({k[len("interface."):]: v for k, v in values.items() if k.startswith("interface.")})
            head.update({k[len("head."):]: v for k, v in values.items() if k.startswith("head.")})

        epoch_losses.append(loss_sum / seen)
        epoch_accuracies.append(correct / seen)
        if train_set.checksum() != checksum:
            raise StateError(f"Training features changed during epoch {epoch}")
        logger.info(f"Epoch {epoch}/{config.epochs}: loss {epoch_losses[-1]:.4f}, accuracy {epoch_accuracies[-1]:.4f}")

    bundle = ModelBundle(interface=interface, head=head)
    result = evaluate_dataset(bundle, test_set)
    logger.info(f"Test accuracy {result.accuracy:.4f}, loss {result.loss:.4f}")

    report = TrainReport(
        epoch_losses=epoch_losses,
        epoch_accuracies=epoch_accuracies,
        test_accuracy=result.accuracy,
        test_loss=result.loss,
        interface_params=interface_count,
        head_params=head_count,
        seed=config.seed,
        config=config.to_dict(),
        layer_weights=effective_layer_weights(interface),
        wall_clock_seconds=time.perf_counter() - started,
    )
    return report, bundle


def evaluate_dataset(bundle: ModelBundle, dataset: FeatureDataset) -> EvalResult:
    """Accuracy and mean loss without touching any parameter."""
    head = bundle.head
    _check_labels(dataset, head.kind, head.num_classes, "evaluation")
    loss_sum, correct, seen = 0.0, 0, 0
    for start in range(0, len(dataset), EVAL_BATCH_SIZE):
        batch = dataset.batch(range(start, min(start + EVAL_BATCH_SIZE, len(dataset))))
        z, _ = forward(bundle.interface, batch.stack)
        logits, _ = head_forward(head, z, batch.segments)
        loss, _ = ce_loss_grad(logits, batch.labels)
        count = len(batch.labels)
        loss_sum += loss * count
        correct += int(np.sum(np.argmax(logits, axis=1) == batch.labels))
        seen += count
    return EvalResult(accuracy=correct / seen, loss=loss_sum / seen, count=seen)


def evaluate(bundle: ModelBundle, manifest: DatasetManifest | str | Path) -> EvalResult:
    """
    Score a trained bundle on a manifest (object or path).

    Raises:
        DataError: If the manifest is empty or its labels do not fit the head
    """
    if not isinstance(manifest, DatasetManifest):
        manifest = load_manifest(manifest)
    if len(manifest) == 0:
        raise DataError("Cannot evaluate on an empty manifest")
    return evaluate_dataset(bundle, FeatureDataset.from_manifest(manifest))
