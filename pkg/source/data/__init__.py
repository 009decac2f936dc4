"""
Data modules for LayerAgg.

Modules:
    lif: LIF layer-feature file reader and writer
    manifest: JSON-lines dataset manifests
    dataset: In-memory feature datasets and batching
    synth: Collision and layer-selection synthetic datasets
"""

__version__ = "1.0.0"

from .lif import read_lif, read_lif_header, write_lif
from .manifest import DatasetManifest, ManifestRecord, load_manifest, write_manifest
from .dataset import Batch, FeatureDataset
from .synth import (
    NuisanceScope,
    SynthSpec,
    SynthTask,
    bayes_accuracy,
    collision_ceiling,
    gen_collision,
    gen_layer_select,
    generate,
)

__all__ = [
    "read_lif",
    "read_lif_header",
    "write_lif",
    "DatasetManifest",
    "ManifestRecord",
    "load_manifest",
    "write_manifest",
    "Batch",
    "FeatureDataset",
    "NuisanceScope",
    "SynthSpec",
    "SynthTask",
    "bayes_accuracy",
    "collision_ceiling",
    "gen_collision",
    "gen_layer_select",
    "generate",
]
