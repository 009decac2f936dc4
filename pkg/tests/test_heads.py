import math

import numpy as np
import pytest

from heads.head import HeadKind, head_backward, head_forward, head_param_count, init_head, matched_hidden_width
from heads.loss import accuracy, ce_loss_grad
from interfaces.spec import InterfaceKind, InterfaceSpec, param_count
from interfaces.stack import TimeFeatures
from numerics.gradcheck import finite_diff_grad, relative_error
from numerics.tensor import make_prng
from utils.errors import ConfigurationError, DataError, DimensionError, StateError


def test_zero_weight_head_emits_bias(rng):
    head = init_head(HeadKind.FRAME, 4, 3, rng)
    bias = np.array([0.5, -1.0, 2.0])
    head.update({"weight": np.zeros((4, 3)), "bias": bias})
    logits, _ = head_forward(head, TimeFeatures(rng.standard_normal((5, 4))))
    np.testing.assert_array_equal(logits, np.tile(bias, (5, 1)))


def test_utterance_head_on_one_frame_matches_frame_head(rng):
    frame = init_head(HeadKind.FRAME, 4, 3, make_prng(1))
    utterance = init_head(HeadKind.UTTERANCE, 4, 3, make_prng(1))
    z = TimeFeatures(rng.standard_normal((1, 4)))
    np.testing.assert_allclose(head_forward(utterance, z)[0], head_forward(frame, z)[0], atol=1e-15)


def test_utterance_head_pools_each_segment(rng):
    head = init_head(HeadKind.UTTERANCE, 3, 2, rng)
    values = rng.standard_normal((5, 3))
    logits, _ = head_forward(head, TimeFeatures(values), segments=[2, 3])
    expected = np.stack([values[:2].mean(axis=0), values[2:].mean(axis=0)]) @ head.weight + head.bias
    np.testing.assert_allclose(logits, expected, atol=1e-12)


def test_segments_must_cover_frames(rng):
    head = init_head(HeadKind.UTTERANCE, 3, 2, rng)
    with pytest.raises(DimensionError):
        head_forward(head, TimeFeatures(rng.standard_normal((5, 3))), segments=[2, 2])


@pytest.mark.parametrize("kind", list(HeadKind))
@pytest.mark.parametrize("hidden", [0, 6])
def test_head_gradients_match_finite_differences(kind, hidden):
    rng = make_prng(21)
    head = init_head(kind, 4, 3, rng, hidden_dim=hidden)
    z = rng.standard_normal((6, 4))
    segments = [2, 4] if kind is HeadKind.UTTERANCE else None
    labels = rng.integers(0, 3, size=2 if segments else 6)

    logits, cache = head_forward(head, TimeFeatures(z), segments)
    _, grad_logits = ce_loss_grad(logits, labels)
    grads, grad_z = head_backward(head, cache, grad_logits)

    def loss_with(name, value):
        tensors = dict(head.tensors)
        tensors[name] = value
        trial = init_head(kind, 4, 3, make_prng(0), hidden_dim=hidden)
        trial.update(tensors)
        return ce_loss_grad(head_forward(trial, TimeFeatures(z), segments)[0], labels)[0]

    for name, value in head.tensors.items():
        numeric = finite_diff_grad(lambda v: loss_with(name, v), value)
        assert relative_error(grads[name], numeric).max() <= 1e-4
    numeric_z = finite_diff_grad(lambda v: ce_loss_grad(head_forward(head, TimeFeatures(v), segments)[0], labels)[0], z)
    assert relative_error(grad_z, numeric_z).max() <= 1e-4


def test_head_cache_goes_stale_after_update(rng):
    head = init_head(HeadKind.FRAME, 3, 2, rng)
    logits, cache = head_forward(head, TimeFeatures(rng.standard_normal((4, 3))))
    head.update({"bias": np.ones(2)})
    with pytest.raises(StateError):
        head_backward(head, cache, np.zeros_like(logits))


def test_head_needs_two_classes(rng):
    with pytest.raises(ConfigurationError):
        init_head(HeadKind.FRAME, 3, 1, rng)


def test_head_param_counts(rng):
    assert head_param_count(8, 2) == 18
    assert head_param_count(8, 2, hidden_dim=60) == 8 * 60 + 60 + 60 * 2 + 2
    head = init_head(HeadKind.UTTERANCE, 8, 2, rng, hidden_dim=5)
    assert head.allocated_count() == head_param_count(8, 2, 5)


def test_matched_width_lands_within_five_percent():
    hier = InterfaceSpec(InterfaceKind.HIER_CONV)
    target = param_count(hier, 13, 8) + head_param_count(8, 2)
    assert target == 674
    ws_count = param_count(InterfaceSpec(InterfaceKind.WEIGHTED_SUM), 13, 8)
    width = matched_hidden_width(target, ws_count, 8, 2)
    total = ws_count + head_param_count(8, 2, width)
    assert width == 60
    assert abs(total - target) <= 0.05 * target


# --- loss and accuracy --------------------------------------------------------

def test_uniform_logits_give_log_classes():
    loss, _ = ce_loss_grad(np.zeros((3, 4)), [0, 1, 3])
    assert loss == pytest.approx(math.log(4), abs=1e-15)


def test_confident_correct_logits_give_near_zero_loss():
    loss, _ = ce_loss_grad(np.array([[100.0, 0.0], [0.0, 100.0]]), [0, 1])
    assert 0.0 <= loss < 1e-12


def test_loss_gradient(rng):
    logits = rng.standard_normal((5, 3))
    labels = np.array([0, 2, 1, 1, 0])
    _, grad = ce_loss_grad(logits, labels)
    numeric = finite_diff_grad(lambda v: ce_loss_grad(v, labels)[0], logits)
    assert relative_error(grad, numeric).max() <= 1e-4
    np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-12)


def test_out_of_range_labels_rejected():
    with pytest.raises(DataError):
        ce_loss_grad(np.zeros((2, 2)), [0, 2])


def test_accuracy_examples(rng):
    logits = np.array([[2.0, 1.0], [0.0, 3.0], [1.0, 1.0]])
    assert accuracy(logits, [0, 1, 0]) == 1.0
    assert accuracy(logits[:2], [1, 0]) == 0.0
    assert accuracy(logits * 7.5, [0, 1, 0]) == accuracy(logits, [0, 1, 0])
    random_logits = rng.standard_normal((10000, 2))
    random_labels = rng.integers(0, 2, size=10000)
    assert abs(accuracy(random_logits, random_labels) - 0.5) <= 0.02
