import numpy as np
import pandas as pd
import pytest

import trainer.training as training
from data.dataset import FeatureDataset
from data.manifest import ManifestRecord, load_manifest
from data.synth import FULL_MANIFEST, TEST_MANIFEST, TRAIN_MANIFEST
from heads.head import HeadKind
from interfaces.spec import InterfaceKind, InterfaceSpec
from trainer.bundle import load_bundle, save_bundle
from trainer.experiment import MATCHED_LABEL, RESULTS_FILE, ExperimentConfig, matched_total, run_experiment
from trainer.optim import OptimizerKind
from trainer.training import TrainConfig, evaluate, train, train_on_datasets
from utils.errors import ConfigurationError, DataError, DivergenceError


def small_config(directory, kind=InterfaceKind.WEIGHTED_SUM, **overrides):
    values = dict(
        interface=InterfaceSpec(kind),
        head_kind=HeadKind.UTTERANCE,
        num_classes=2,
        train_manifest=str(directory / TRAIN_MANIFEST),
        test_manifest=str(directory / TEST_MANIFEST),
        epochs=30,
        batch_size=8,
        learning_rate=1e-2,
        seed=3,
    )
    values.update(overrides)
    return TrainConfig(**values)


def default_config(directory, kind):
    return TrainConfig(
        interface=InterfaceSpec(kind),
        head_kind=HeadKind.UTTERANCE,
        num_classes=2,
        train_manifest=str(directory / TRAIN_MANIFEST),
        test_manifest=str(directory / TEST_MANIFEST),
        epochs=30,
        batch_size=32,
        learning_rate=1e-3,
        seed=0,
    )


# --- plumbing on the small dataset --------------------------------------------

def test_training_loss_decreases(small_dataset_dir):
    report, _ = train(small_config(small_dataset_dir))
    assert len(report.epoch_losses) == 30
    assert report.epoch_losses[-1] < report.epoch_losses[0]
    assert all(0.0 <= a <= 1.0 for a in report.epoch_accuracies)


@pytest.mark.parametrize("kind", list(InterfaceKind))
def test_every_interface_trains(small_dataset_dir, kind):
    report, bundle = train(small_config(small_dataset_dir, kind, epochs=2))
    assert np.isfinite(report.test_loss)
    assert report.interface_params == bundle.interface.allocated_count()
    assert report.head_params == bundle.head.allocated_count()


def test_same_seed_gives_identical_reports(small_dataset_dir):
    first, _ = train(small_config(small_dataset_dir, InterfaceKind.HIER_CONV, epochs=3))
    second, _ = train(small_config(small_dataset_dir, InterfaceKind.HIER_CONV, epochs=3))
    assert first.to_dict() == second.to_dict()
    assert "wall_clock_seconds" not in first.to_dict()
    assert "wall_clock_seconds" in first.to_dict(include_timing=True)


def test_different_seeds_differ(small_dataset_dir):
    first, _ = train(small_config(small_dataset_dir, epochs=2, seed=1))
    second, _ = train(small_config(small_dataset_dir, epochs=2, seed=2))
    assert first.epoch_losses != second.epoch_losses


def test_layer_weights_are_reported(small_dataset_dir):
    report, _ = train(small_config(small_dataset_dir))
    (weights,) = report.layer_weights
    assert len(weights) == 5
    assert sum(weights) == pytest.approx(1.0, abs=1e-12)
    assert int(np.argmax(weights)) == 3


def test_plain_gradient_descent(small_dataset_dir):
    report, _ = train(small_config(small_dataset_dir, optimizer=OptimizerKind.GD, learning_rate=0.1))
    assert report.epoch_losses[-1] < report.epoch_losses[0]
    assert report.config["optimizer"] == "gd"


def test_features_are_not_modified(small_dataset_dir):
    manifest = load_manifest(small_dataset_dir / TRAIN_MANIFEST)
    train_set = FeatureDataset.from_manifest(manifest)
    test_set = FeatureDataset.from_manifest(load_manifest(small_dataset_dir / TEST_MANIFEST))
    before = train_set.checksum()
    train_on_datasets(small_config(small_dataset_dir, InterfaceKind.CLS_POOL, epochs=2), train_set, test_set)
    assert train_set.checksum() == before
    assert train_set.checksum() == FeatureDataset.from_manifest(manifest).checksum()


def test_evaluate_reproduces_report(small_dataset_dir, tmp_path):
    report, bundle = train(small_config(small_dataset_dir, InterfaceKind.CONCAT_PROJ, epochs=5))
    result = evaluate(bundle, small_dataset_dir / TEST_MANIFEST)
    assert result.accuracy == report.test_accuracy
    assert result.loss == report.test_loss
    assert result.count == 12
    reloaded = load_bundle(save_bundle(bundle, tmp_path / "model.lim"))
    assert evaluate(reloaded, small_dataset_dir / TEST_MANIFEST).to_dict() == result.to_dict()


def test_evaluate_rejects_empty_manifest(small_dataset_dir, tmp_path):
    _, bundle = train(small_config(small_dataset_dir, epochs=1))
    (tmp_path / "empty.jsonl").write_text("")
    with pytest.raises(DataError):
        evaluate(bundle, tmp_path / "empty.jsonl")


def test_head_must_match_label_form(small_dataset_dir):
    with pytest.raises(DataError):
        train(small_config(small_dataset_dir, head_kind=HeadKind.FRAME, epochs=1))


def test_class_ids_must_fit_the_head(tmp_path, small_dataset_dir):
    manifest = load_manifest(small_dataset_dir / FULL_MANIFEST)
    relabeled = [ManifestRecord(r.feature_path, utt_label=r.utt_label + 1) for r in manifest.records]
    dataset = FeatureDataset.from_manifest(type(manifest)(relabeled))
    with pytest.raises(DataError):
        train_on_datasets(small_config(small_dataset_dir, epochs=1), dataset, dataset)


@pytest.mark.parametrize("overrides", [{"epochs": 0}, {"batch_size": 0}, {"learning_rate": 0.0}, {"num_classes": 1}])
def test_invalid_hyperparameters(small_dataset_dir, overrides):
    with pytest.raises(ConfigurationError):
        train(small_config(small_dataset_dir, **overrides))


def test_non_finite_loss_raises_divergence(small_dataset_dir, monkeypatch):
    original = training.ce_loss_grad

    def poisoned(logits, labels):
        _, grad = original(logits, labels)
        return float("nan"), grad

    monkeypatch.setattr(training, "ce_loss_grad", poisoned)
    with pytest.raises(DivergenceError) as info:
        train(small_config(small_dataset_dir, epochs=2))
    assert info.value.epoch == 1


def test_frame_level_training(tmp_path, small_dataset_dir):
    manifest = load_manifest(small_dataset_dir / FULL_MANIFEST)
    records = [ManifestRecord(r.feature_path, frame_labels=(r.utt_label,) * 6) for r in manifest.records]
    dataset = FeatureDataset.from_manifest(type(manifest)(records))
    config = small_config(small_dataset_dir, head_kind=HeadKind.FRAME, epochs=10)
    report, _ = train_on_datasets(config, dataset, dataset)
    assert report.epoch_losses[-1] < report.epoch_losses[0]


# --- collision acceptance runs ------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("kind", [InterfaceKind.HIER_CONV, InterfaceKind.CONCAT_PROJ])
def test_collision_is_solved_by_mixing_interfaces(collision_dir, kind):
    report, _ = train(default_config(collision_dir, kind))
    assert report.test_accuracy >= 0.95


@pytest.mark.slow
def test_collision_defeats_weighted_sum(collision_dir):
    report, _ = train(default_config(collision_dir, InterfaceKind.WEIGHTED_SUM))
    assert report.test_accuracy <= 0.65


@pytest.mark.slow
def test_layer_select_is_solved_by_weighted_sum(layer_select_dir):
    report, _ = train(default_config(layer_select_dir, InterfaceKind.WEIGHTED_SUM))
    assert report.test_accuracy >= 0.95


@pytest.mark.slow
@pytest.mark.parametrize("kind", list(InterfaceKind))
def test_layer_select_loss_decreases_for_every_interface(layer_select_dir, kind):
    report, _ = train(default_config(layer_select_dir, kind))
    assert len(report.epoch_losses) == 30
    assert report.epoch_losses[-1] < report.epoch_losses[0]


@pytest.mark.slow
def test_matched_head_does_not_rescue_weighted_sum(collision_dir):
    hier, _ = train(default_config(collision_dir, InterfaceKind.HIER_CONV))
    wide = TrainConfig(**{**default_config(collision_dir, InterfaceKind.WEIGHTED_SUM).__dict__, "head_hidden": 60})
    report, _ = train(wide)
    assert abs(report.total_params - hier.total_params) <= 0.05 * hier.total_params
    assert report.test_accuracy <= hier.test_accuracy - 0.20


# --- experiment harness -------------------------------------------------------

def test_matched_total():
    assert matched_total(13, 8, 2) == 674


def test_small_experiment_writes_results(tmp_path):
    config = ExperimentConfig(
        out_dir=str(tmp_path),
        kinds=(InterfaceKind.WEIGHTED_SUM, InterfaceKind.HIER_CONV),
        layer_counts=(7,),
        epochs=2,
        n=40,
        seed=1,
    )
    frame = run_experiment(config)
    assert list(frame["interface"]) == ["weighted-sum", "hier-conv", MATCHED_LABEL]
    assert set(frame["layers"]) == {7}
    saved = pd.read_csv(tmp_path / RESULTS_FILE)
    assert list(saved.columns) == list(frame.columns)
    assert len(saved) == 3
    matched = frame[frame["interface"] == MATCHED_LABEL].iloc[0]
    hier = frame[frame["interface"] == "hier-conv"].iloc[0]
    assert abs(matched["total_params"] - hier["total_params"]) <= 0.05 * hier["total_params"]
    assert (tmp_path / "collision_L7" / TRAIN_MANIFEST).exists()


def test_experiment_needs_interfaces(tmp_path):
    with pytest.raises(ConfigurationError):
        run_experiment(ExperimentConfig(out_dir=str(tmp_path), kinds=()))
