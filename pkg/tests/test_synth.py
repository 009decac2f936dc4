import math

import numpy as np
import pytest

from data.dataset import FeatureDataset
from data.manifest import load_manifest
from data.synth import (
    FULL_MANIFEST,
    TEST_MANIFEST,
    TRAIN_MANIFEST,
    NuisanceScope,
    SynthSpec,
    SynthTask,
    bayes_accuracy,
    collision_ceiling,
    expected_signal_correlation,
    gen_collision,
    gen_layer_select,
    generate,
)
from utils.errors import ConfigurationError


def load_all(directory):
    dataset = FeatureDataset.from_manifest(load_manifest(directory / FULL_MANIFEST))
    values = np.stack([s.values for s in dataset.stacks])
    labels = np.array([int(y) for y in dataset.labels])
    return values, labels


@pytest.fixture(scope="module")
def collision_data(collision_dir):
    return load_all(collision_dir)


def test_same_seed_gives_identical_files(tmp_path):
    spec = SynthSpec.defaults(SynthTask.COLLISION, n=12, seed=5)
    generate(spec, tmp_path / "a")
    generate(spec, tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert {FULL_MANIFEST, TRAIN_MANIFEST, TEST_MANIFEST} <= set(names)
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_different_seeds_differ(tmp_path):
    generate(SynthSpec.defaults(SynthTask.COLLISION, n=3, seed=1), tmp_path / "a")
    generate(SynthSpec.defaults(SynthTask.COLLISION, n=3, seed=2), tmp_path / "b")
    assert (tmp_path / "a" / "utt_00000.lif").read_bytes() != (tmp_path / "b" / "utt_00000.lif").read_bytes()


def test_manifests_split_first_eighty_percent(collision_dir):
    full = load_manifest(collision_dir / FULL_MANIFEST, check_files=False)
    train = load_manifest(collision_dir / TRAIN_MANIFEST, check_files=False)
    test = load_manifest(collision_dir / TEST_MANIFEST, check_files=False)
    assert (len(full), len(train), len(test)) == (2000, 1600, 400)
    assert train.records + test.records == full.records


def test_collision_labels_are_balanced(collision_data):
    _, labels = collision_data
    n = len(labels)
    assert abs(int(labels.sum()) - n / 2) <= 3 * math.sqrt(n)


def test_collision_shapes(collision_data):
    values, _ = collision_data
    assert values.shape == (2000, 13, 20, 8)


def test_signal_layers_are_strongly_correlated(collision_data):
    values, _ = collision_data
    spec = SynthSpec.defaults(SynthTask.COLLISION)
    correlation = np.corrcoef(values[:, 3, :, 0].ravel(), values[:, 5, :, 0].ravel())[0, 1]
    assert correlation == pytest.approx(expected_signal_correlation(spec), abs=0.02)
    assert correlation > 0.9


def test_per_frame_nuisance_keeps_the_correlation(tmp_path):
    spec = SynthSpec.defaults(SynthTask.COLLISION, n=300, seed=3, nuisance_scope=NuisanceScope.FRAME)
    generate(spec, tmp_path)
    values, _ = load_all(tmp_path)
    correlation = np.corrcoef(values[:, 3, :, 0].ravel(), values[:, 5, :, 0].ravel())[0, 1]
    assert correlation == pytest.approx(expected_signal_correlation(spec), abs=0.02)


def test_layer_difference_separates_the_classes(collision_data):
    values, labels = collision_data
    score = (values[:, 3, :, 0] - values[:, 5, :, 0]).mean(axis=1)
    predictions = (score > 0).astype(int)
    assert np.mean(predictions == labels) >= 0.999
    assert bayes_accuracy(SynthSpec.defaults(SynthTask.COLLISION)) >= 0.999


def test_single_signal_layer_is_near_chance(collision_data):
    values, labels = collision_data
    predictions = (values[:, 3, :, 0].mean(axis=1) > 0).astype(int)
    assert np.mean(predictions == labels) <= 0.65


def test_mixing_ceiling_at_defaults():
    spec = SynthSpec.defaults(SynthTask.COLLISION)
    ceiling = collision_ceiling(spec)
    assert 0.5 < ceiling <= 0.62
    assert ceiling == pytest.approx(0.579, abs=0.005)


def test_mixing_ceiling_rises_without_nuisance():
    spec = SynthSpec.defaults(SynthTask.COLLISION, nuisance_sigma=0.0)
    assert collision_ceiling(spec) > 0.99


def test_per_frame_nuisance_raises_the_ceiling():
    utterance = collision_ceiling(SynthSpec.defaults(SynthTask.COLLISION))
    frame = collision_ceiling(SynthSpec.defaults(SynthTask.COLLISION, nuisance_scope=NuisanceScope.FRAME))
    assert frame > utterance


def test_layer_select_signal_lives_in_one_layer(small_dataset_dir):
    values, labels = load_all(small_dataset_dir)
    signs = 2 * labels - 1
    (j,) = SynthSpec.defaults(SynthTask.LAYER_SELECT).signal_layers
    per_layer = (values[:, :, :, 0].mean(axis=2) * signs[:, None]).mean(axis=0)
    assert per_layer[j] == pytest.approx(1.0, abs=0.15)
    others = np.delete(per_layer, j)
    assert np.all(np.abs(others) < 0.3)
    predictions = (values[:, j, :, 0].mean(axis=1) > 0).astype(int)
    np.testing.assert_array_equal(predictions, labels)


def test_task_names_accept_cli_spelling():
    assert SynthTask.from_name("layer-select") is SynthTask.LAYER_SELECT
    assert SynthTask.from_name("collision") is SynthTask.COLLISION
    with pytest.raises(ConfigurationError):
        SynthTask.from_name("parity")


def test_layer_select_defaults():
    spec = SynthSpec.defaults(SynthTask.LAYER_SELECT)
    assert spec.signal_layers == (3,)
    assert spec.noise_sigma == 0.5


@pytest.mark.parametrize("overrides", [
    {"n": 0},
    {"signal_layers": (3, 3)},
    {"signal_layers": (3, 13)},
    {"signal_layers": (3,)},
    {"margin": 0.0},
    {"noise_sigma": -1.0},
    {"train_fraction": 1.5},
])
def test_invalid_collision_specs(tmp_path, overrides):
    with pytest.raises(ConfigurationError):
        generate(SynthSpec.defaults(SynthTask.COLLISION, **overrides), tmp_path)


def test_generator_task_must_match(tmp_path):
    with pytest.raises(ConfigurationError):
        gen_collision(SynthSpec.defaults(SynthTask.LAYER_SELECT), tmp_path)
    with pytest.raises(ConfigurationError):
        gen_layer_select(SynthSpec.defaults(SynthTask.COLLISION), tmp_path)
