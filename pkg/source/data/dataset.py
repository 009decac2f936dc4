"""
In-memory feature datasets built from manifests.
"""

import hashlib
import numpy as np

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from data.lif import read_lif
from data.manifest import DatasetManifest
from interfaces.stack import LayerStack
from utils.errors import DataError
from utils.logging_config import get_logger

logger = get_logger(__name__)


@dataclass
class Batch:
    """Utterances joined along frames, with their frame counts and labels."""
    stack: LayerStack
    segments: List[int]
    labels: np.ndarray


class FeatureDataset:
    """
    Frozen upstream features and labels for every manifest record.

    Feature arrays are made read-only after loading; ``checksum`` lets the
    trainer confirm they are never modified.
    """

    def __init__(self, stacks: Sequence[LayerStack], labels: Sequence, frame_level: bool):
        if len(stacks) != len(labels):
            raise DataError(f"{len(stacks)} stacks but {len(labels)} label entries")
        self.stacks = list(stacks)
        self.labels = [np.asarray(y, dtype=np.int64) for y in labels]
        self.frame_level = frame_level
        for stack in self.stacks:
            stack.values.flags.writeable = False

    @classmethod
    def from_manifest(cls, manifest: DatasetManifest) -> "FeatureDataset":
        """
        Raises:
            DataError: If records mix utterance and frame labels
        """
        forms = {record.is_utterance for record in manifest.records}
        if len(forms) > 1:
            raise DataError("Manifest mixes utterance labels and frame labels")
        stacks, labels = [], []
        for record in manifest.records:
            stacks.append(read_lif(record.feature_path))
            labels.append(record.utt_label if record.is_utterance else list(record.frame_labels))
        frame_level = bool(forms) and not forms.pop()
        logger.info(f"Loaded {len(stacks)} feature stacks ({'frame' if frame_level else 'utterance'} labels)")
        return cls(stacks, labels, frame_level)

    def __len__(self) -> int:
        return len(self.stacks)

    @property
    def dims(self) -> Tuple[int, int]:
        if not self.stacks:
            raise DataError("Dataset is empty")
        return self.stacks[0].num_layers, self.stacks[0].dim

    @property
    def max_label(self) -> int:
        return max(int(y.max()) for y in self.labels) if self.labels else -1

    def batch(self, indices: Sequence[int]) -> Batch:
        chosen = [self.stacks[i] for i in indices]
        labels = [self.labels[i] for i in indices]
        if self.frame_level:
            label_array = np.concatenate(labels)
        else:
            label_array = np.asarray(labels, dtype=np.int64)
        return Batch(LayerStack.concat_frames(chosen), [s.num_frames for s in chosen], label_array)

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for stack in self.stacks:
            digest.update(stack.values.tobytes())
        return digest.hexdigest()
