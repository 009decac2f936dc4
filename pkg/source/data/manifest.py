"""
Dataset manifests: one JSON object per line with ``feature_path`` and
exactly one of ``utt_label`` or ``frame_labels``.
"""

import json
import os

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from data.lif import read_lif_header
from utils.errors import DataError, FormatError, ParseError
from utils.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ManifestRecord:
    feature_path: str
    utt_label: Optional[int] = None
    frame_labels: Optional[Tuple[int, ...]] = None

    @property
    def is_utterance(self) -> bool:
        return self.utt_label is not None

    def to_json(self, base_dir: Optional[Path] = None) -> str:
        path = self.feature_path
        if base_dir is not None:
            try:
                path = os.path.relpath(path, base_dir)
            except ValueError:
                pass
        entry = {"feature_path": Path(path).as_posix()}
        if self.utt_label is not None:
            entry["utt_label"] = int(self.utt_label)
        else:
            entry["frame_labels"] = [int(x) for x in self.frame_labels]
        return json.dumps(entry, sort_keys=True)


@dataclass
class DatasetManifest:
    """Validated records; ``num_layers``/``dim`` are set once files are checked."""
    records: List[ManifestRecord] = field(default_factory=list)
    num_layers: Optional[int] = None
    dim: Optional[int] = None

    def __len__(self) -> int:
        return len(self.records)

    def split(self, train_fraction: float) -> Tuple["DatasetManifest", "DatasetManifest"]:
        """First ``train_fraction`` of records for training, the rest for testing."""
        cut = int(round(len(self.records) * train_fraction))
        return (
            DatasetManifest(self.records[:cut], self.num_layers, self.dim),
            DatasetManifest(self.records[cut:], self.num_layers, self.dim),
        )


def _parse_label(value, line_number: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ParseError(f"class ids must be non-negative integers, got {value!r}", line_number)
    return value


def parse_record(line: bytes | str, line_number: int, base_dir: Path) -> ManifestRecord:
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"not valid UTF-8 (byte {e.start})", line_number) from e
    try:
        entry = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON ({e.msg})", line_number) from e
    if not isinstance(entry, dict):
        raise ParseError("record must be a JSON object", line_number)
    unknown = set(entry) - {"feature_path", "utt_label", "frame_labels"}
    if unknown:
        raise ParseError(f"unknown fields {sorted(unknown)}", line_number)

    feature_path = entry.get("feature_path")
    if not isinstance(feature_path, str) or not feature_path:
        raise ParseError("missing feature_path", line_number)
    utt_label = entry.get("utt_label")
    frame_labels = entry.get("frame_labels")
    if (utt_label is None) == (frame_labels is None):
        raise ParseError("record needs exactly one of utt_label or frame_labels", line_number)

    path = Path(feature_path)
    if not path.is_absolute():
        path = base_dir / path
    if utt_label is not None:
        return ManifestRecord(str(path), utt_label=_parse_label(utt_label, line_number))
    if not isinstance(frame_labels, list) or not frame_labels:
        raise ParseError("frame_labels must be a non-empty list", line_number)
    labels = tuple(_parse_label(x, line_number) for x in frame_labels)
    return ManifestRecord(str(path), frame_labels=labels)


def load_manifest(path: str | Path, check_files: bool = True) -> DatasetManifest:
    """
    Load and validate a manifest.

    Relative feature paths resolve against the manifest's directory. With
    ``check_files`` every feature header is read to enforce one (L, D)
    across files and frame-label lengths equal to T.

    Raises:
        ParseError: On a malformed line (with its line number)
        DataError: On missing files or inconsistent dimensions
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"Manifest not found: {path}")
    base_dir = path.parent
    records: List[ManifestRecord] = []
    with open(path, "rb") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            records.append(parse_record(line, line_number, base_dir))

    manifest = DatasetManifest(records)
    if check_files:
        validate_files(manifest)
    logger.info(f"Loaded manifest {path} with {len(records)} records")
    return manifest


def validate_files(manifest: DatasetManifest) -> None:
    dims = None
    for record in manifest.records:
        try:
            header = read_lif_header(record.feature_path)
        except FileNotFoundError as e:
            raise DataError(f"Feature file not found: {record.feature_path}") from e
        except FormatError:
            raise
        if dims is None:
            dims = (header.num_layers, header.dim)
        elif (header.num_layers, header.dim) != dims:
            raise DataError(
                f"{record.feature_path} has (L={header.num_layers}, D={header.dim}), "
                f"expected (L={dims[0]}, D={dims[1]})"
            )
        if record.frame_labels is not None and len(record.frame_labels) != header.num_frames:
            raise DataError(
                f"{record.feature_path} has T={header.num_frames} but {len(record.frame_labels)} frame labels"
            )
    if dims is not None:
        manifest.num_layers, manifest.dim = dims


def write_manifest(manifest: DatasetManifest, path: str | Path) -> Path:
    """Write records as JSON lines; feature paths are stored relative to the manifest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base_dir = path.parent.resolve()
    with open(path, "w", encoding="utf-8") as handle:
        for record in manifest.records:
            absolute = ManifestRecord(str(Path(record.feature_path).resolve()), record.utt_label, record.frame_labels)
            handle.write(absolute.to_json(base_dir) + "\n")
    return path
