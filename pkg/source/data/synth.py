"""
Synthetic layer-stack datasets.

Two tasks are generated. ``collision`` places a class signal with opposite
signs in two layers that share a large nuisance, so the label survives in
their difference but not in any nonnegative mix. ``layer_select`` places
the signal in a single layer, which a weighted sum can pick out.

Draw order per utterance is fixed: label, background N(0, 1) stack,
nuisance, then noise. Equal specs therefore produce byte-identical files.
"""

import numpy as np

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from scipy.stats import norm
from typing import Tuple

from data.lif import write_lif
from data.manifest import DatasetManifest, ManifestRecord, write_manifest
from interfaces.stack import LayerStack
from numerics.tensor import Prng, make_prng
from utils.errors import ConfigurationError
from utils.logging_config import get_logger
from utils.settings_manager import get_setting

logger = get_logger(__name__)

TRAIN_MANIFEST = "train.jsonl"
TEST_MANIFEST = "test.jsonl"
FULL_MANIFEST = "all.jsonl"


class SynthTask(Enum):
    COLLISION = "collision"
    LAYER_SELECT = "layer_select"

    @classmethod
    def from_name(cls, name: str) -> "SynthTask":
        """Accept both ``layer_select`` and the CLI spelling ``layer-select``."""
        try:
            return cls(name.replace("-", "_"))
        except ValueError as e:
            raise ConfigurationError(f"Unknown synthetic task '{name}'") from e


class NuisanceScope(Enum):
    """Whether the shared nuisance is drawn once per utterance or per frame."""
    UTTERANCE = "utterance"
    FRAME = "frame"


@dataclass(frozen=True)
class SynthSpec:
    task: SynthTask
    n: int = 2000
    num_layers: int = 13
    num_frames: int = 20
    dim: int = 8
    signal_layers: Tuple[int, ...] = (3, 5)
    margin: float = 1.0
    nuisance_sigma: float = 5.0
    noise_sigma: float = 0.1
    seed: int = 0
    nuisance_scope: NuisanceScope = NuisanceScope.UTTERANCE
    train_fraction: float = 0.8

    @classmethod
    def defaults(cls, task: SynthTask, **overrides) -> "SynthSpec":
        """Task defaults from the settings manager, then ``overrides``."""
        layers = tuple(get_setting("synth_signal_layers", (3, 5)))
        if task is SynthTask.COLLISION:
            noise = get_setting("synth_noise_collision", 0.1)
        else:
            layers = layers[:1]
            noise = get_setting("synth_noise_layer_select", 0.5)
        spec = cls(
            task=task,
            n=get_setting("synth_n", 2000),
            num_layers=get_setting("synth_layers", 13),
            num_frames=get_setting("synth_frames", 20),
            dim=get_setting("synth_dim", 8),
            signal_layers=layers,
            margin=get_setting("synth_margin", 1.0),
            nuisance_sigma=get_setting("synth_nuisance", 5.0),
            noise_sigma=noise,
            train_fraction=get_setting("synth_train_fraction", 0.8),
        )
        return replace(spec, **overrides)

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: If any field is out of range for the task
        """
        if min(self.n, self.num_layers, self.num_frames, self.dim) < 1:
            raise ConfigurationError(
                f"n, L, T, D must be >= 1, got {self.n}, {self.num_layers}, {self.num_frames}, {self.dim}"
            )
        expected = 2 if self.task is SynthTask.COLLISION else 1
        if len(self.signal_layers) != expected:
            raise ConfigurationError(
                f"{self.task.value} needs {expected} signal layer(s), got {tuple(self.signal_layers)}"
            )
        if any(not 0 <= j < self.num_layers for j in self.signal_layers):
            raise ConfigurationError(f"Signal layers {tuple(self.signal_layers)} must lie in [0, {self.num_layers})")
        if self.task is SynthTask.COLLISION and self.signal_layers[0] == self.signal_layers[1]:
            raise ConfigurationError("Collision signal layers must differ")
        if not self.margin > 0:
            raise ConfigurationError(f"margin must be > 0, got {self.margin}")
        if self.nuisance_sigma < 0 or self.noise_sigma < 0:
            raise ConfigurationError("Standard deviations must be >= 0")
        if not 0.0 <= self.train_fraction <= 1.0:
            raise ConfigurationError(f"train_fraction must lie in [0, 1], got {self.train_fraction}")

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "n": self.n,
            "layers": self.num_layers,
            "frames": self.num_frames,
            "dim": self.dim,
            "signal_layers": list(self.signal_layers),
            "margin": self.margin,
            "nuisance_sigma": self.nuisance_sigma,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "nuisance_scope": self.nuisance_scope.value,
            "train_fraction": self.train_fraction,
        }


def _draw_utterance(spec: SynthSpec, rng: Prng) -> Tuple[np.ndarray, int]:
    label = int(rng.integers(0, 2))
    values = rng.standard_normal((spec.num_layers, spec.num_frames, spec.dim))
    signal = spec.margin * (2 * label - 1)

    if spec.task is SynthTask.COLLISION:
        a, b = spec.signal_layers
        size = 1 if spec.nuisance_scope is NuisanceScope.UTTERANCE else spec.num_frames
        nuisance = rng.normal(0.0, spec.nuisance_sigma, size=size)
        noise = rng.normal(0.0, spec.noise_sigma, size=(2, spec.num_frames))
        values[a, :, 0] = nuisance + signal + noise[0]
        values[b, :, 0] = nuisance - signal + noise[1]
    else:
        (j,) = spec.signal_layers
        values[j, :, 0] = signal + rng.normal(0.0, spec.noise_sigma, size=spec.num_frames)
    return values, label


def _generate(spec: SynthSpec, out_dir: str | Path) -> DatasetManifest:
    spec.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = make_prng(spec.seed)

    records = []
    for index in range(spec.n):
        values, label = _draw_utterance(spec, rng)
        path = out_dir / f"utt_{index:05d}.lif"
        write_lif(LayerStack(values), path)
        records.append(ManifestRecord(str(path), utt_label=label))

    manifest = DatasetManifest(records, num_layers=spec.num_layers, dim=spec.dim)
    train, test = manifest.split(spec.train_fraction)
    write_manifest(manifest, out_dir / FULL_MANIFEST)
    write_manifest(train, out_dir / TRAIN_MANIFEST)
    write_manifest(test, out_dir / TEST_MANIFEST)

    positives = sum(r.utt_label for r in records)
    logger.info(
        f"Generated {spec.task.value} dataset in {out_dir}: {spec.n} utterances "
        f"({positives} positive), {len(train)} train / {len(test)} test"
    )
    return manifest


def gen_collision(spec: SynthSpec, out_dir: str | Path) -> DatasetManifest:
    """
    Write the collision dataset and its manifests to ``out_dir``.

    Returns:
        The full manifest; ``train.jsonl`` and ``test.jsonl`` hold the split

    Raises:
        ConfigurationError: If ``spec`` is invalid or not a collision spec
    """
    if spec.task is not SynthTask.COLLISION:
        raise ConfigurationError(f"gen_collision needs task 'collision', got '{spec.task.value}'")
    return _generate(spec, out_dir)


def gen_layer_select(spec: SynthSpec, out_dir: str | Path) -> DatasetManifest:
    """Write the single-signal-layer dataset and its manifests to ``out_dir``."""
    if spec.task is not SynthTask.LAYER_SELECT:
        raise ConfigurationError(f"gen_layer_select needs task 'layer_select', got '{spec.task.value}'")
    return _generate(spec, out_dir)


def generate(spec: SynthSpec, out_dir: str | Path) -> DatasetManifest:
    if spec.task is SynthTask.COLLISION:
        return gen_collision(spec, out_dir)
    return gen_layer_select(spec, out_dir)


def _averaged_nuisance_variance(spec: SynthSpec) -> float:
    if spec.nuisance_scope is NuisanceScope.UTTERANCE:
        return spec.nuisance_sigma ** 2
    return spec.nuisance_sigma ** 2 / spec.num_frames


def collision_ceiling(spec: SynthSpec, grid_size: int = 1001) -> float:
    """
    Best accuracy of any nonnegative mix alpha*h[a] + (1-alpha)*h[b], averaged
    over frames, followed by an optimal threshold.

    The signal is m*|2*alpha - 1| and the noise variance is the averaged
    nuisance plus (alpha^2 + (1-alpha)^2) * noise_sigma^2 / T.
    """
    alpha = np.linspace(0.0, 1.0, grid_size)
    signal = spec.margin * np.abs(2.0 * alpha - 1.0)
    noise = _averaged_nuisance_variance(spec) + (alpha ** 2 + (1.0 - alpha) ** 2) * spec.noise_sigma ** 2 / spec.num_frames
    return float(np.max(norm.cdf(signal / np.sqrt(noise))))


def bayes_accuracy(spec: SynthSpec) -> float:
    """Accuracy of the optimal frame-averaged classifier under the generating model."""
    if spec.noise_sigma == 0:
        return 1.0
    if spec.task is SynthTask.COLLISION:
        # h[a] - h[b] cancels the nuisance: 2m(2y-1) plus noise of variance 2*sigma^2/T
        return float(norm.cdf(2.0 * spec.margin * np.sqrt(spec.num_frames) / (np.sqrt(2.0) * spec.noise_sigma)))
    return float(norm.cdf(spec.margin * np.sqrt(spec.num_frames) / spec.noise_sigma))


def expected_signal_correlation(spec: SynthSpec) -> float:
    """Population correlation of h[a, :, 0] and h[b, :, 0] over all frames."""
    shared = spec.nuisance_sigma ** 2
    total = shared + spec.margin ** 2 + spec.noise_sigma ** 2
    return (shared - spec.margin ** 2) / total
