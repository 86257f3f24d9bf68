"""Tests for AM-Softmax, the margin schedule and the weighted cross-entropy."""

import numpy as np
import pytest

from durspoof.autograd.tensor import Tensor
from durspoof.errors import ConfigurationError, DimensionError, InputError
from durspoof.losses import (
    AMSoftmaxConfig,
    LossConfig,
    MarginSchedule,
    am_softmax_loss,
    cosine_logits,
    margin_for_duration,
    scores_from_embeddings,
    weighted_ce_loss,
)


def numpy_cross_entropy(logits, labels):
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return -log_probs[np.arange(len(labels)), labels].mean()


def unit(x, axis):
    return x / np.linalg.norm(x, axis=axis, keepdims=True)


class TestAMSoftmax:
    def test_zero_margin_unit_scale_is_cosine_cross_entropy(self):
        rng = np.random.default_rng(0)
        config = AMSoftmaxConfig(scale_factor=1.0)
        for _ in range(100):
            emb = rng.standard_normal((8, 6))
            weights = rng.standard_normal((6, 2))
            labels = rng.integers(0, 2, 8)
            loss = am_softmax_loss(Tensor(emb), labels, Tensor(weights), config, margin=0.0)
            expected = numpy_cross_entropy(unit(emb, 1) @ unit(weights, 0), labels)
            assert abs(float(loss.data) - expected) < 1e-6

    def test_confident_sample_matches_closed_form(self):
        emb = Tensor(np.array([[1.0, 0.0]]))
        weights = Tensor(np.array([[1.0, -1.0], [0.0, 0.0]]))
        loss = am_softmax_loss(emb, [0], weights, AMSoftmaxConfig(scale_factor=15.0), margin=0.2)
        assert abs(float(loss.data) - np.log1p(np.exp(-27.0))) < 1e-15

    def test_invariant_to_embedding_and_weight_scale(self):
        rng = np.random.default_rng(1)
        emb = rng.standard_normal((5, 4))
        weights = rng.standard_normal((4, 2))
        labels = [0, 1, 1, 0, 1]
        base = float(am_softmax_loss(Tensor(emb), labels, Tensor(weights), margin=0.3).data)
        scaled = float(am_softmax_loss(Tensor(7.0 * emb), labels, Tensor(0.2 * weights), margin=0.3).data)
        assert scaled == pytest.approx(base, abs=1e-12)

    def test_loss_grows_with_margin(self):
        rng = np.random.default_rng(2)
        emb = Tensor(rng.standard_normal((6, 4)))
        weights = Tensor(rng.standard_normal((4, 2)))
        labels = [0, 1, 0, 1, 1, 0]
        losses = [float(am_softmax_loss(emb, labels, weights, margin=m).data) for m in np.linspace(0, 0.9, 10)]
        assert all(b > a for a, b in zip(losses, losses[1:]))

    def test_per_sample_losses(self):
        rng = np.random.default_rng(3)
        emb = Tensor(rng.standard_normal((4, 3)))
        weights = Tensor(rng.standard_normal((3, 2)))
        per_sample = am_softmax_loss(emb, [0, 1, 1, 0], weights, margin=0.1, per_sample=True)
        mean = am_softmax_loss(emb, [0, 1, 1, 0], weights, margin=0.1)
        assert per_sample.shape == (4,)
        assert float(mean.data) == pytest.approx(per_sample.data.mean())

    @pytest.mark.parametrize("margin", [-0.1, 1.0, 1.5])
    def test_margin_out_of_range(self, margin):
        with pytest.raises(ConfigurationError, match="margin"):
            am_softmax_loss(Tensor(np.ones((1, 2))), [0], Tensor(np.eye(2)), margin=margin)

    @pytest.mark.parametrize("labels", [[2], [-1], [0.5]])
    def test_bad_labels(self, labels):
        with pytest.raises(InputError, match="labels"):
            am_softmax_loss(Tensor(np.ones((1, 2))), labels, Tensor(np.eye(2)))

    def test_label_count_mismatch(self):
        with pytest.raises(DimensionError):
            am_softmax_loss(Tensor(np.ones((2, 2))), [0], Tensor(np.eye(2)))

    def test_cosines_are_bounded(self):
        rng = np.random.default_rng(4)
        cos = cosine_logits(Tensor(rng.standard_normal((10, 5))), Tensor(rng.standard_normal((5, 2)))).data
        assert np.all(np.abs(cos) <= 1.0 + 1e-12)


class TestMarginSchedule:
    """Affine duration-to-margin map with clamped endpoints."""

    def test_defaults_hit_the_endpoints(self):
        schedule = MarginSchedule()
        schedule.validate()
        assert schedule.margin_for_duration(1.0) == pytest.approx(0.2)
        assert schedule.margin_for_duration(6.0) == pytest.approx(0.5)
        assert margin_for_duration(3.5, schedule) == pytest.approx(0.35)

    @pytest.mark.parametrize("duration,expected", [(0.0, 0.2), (0.5, 0.2), (6.5, 0.5), (30.0, 0.5)])
    def test_clamped_outside_the_range(self, duration, expected):
        assert MarginSchedule().margin_for_duration(duration) == pytest.approx(expected)

    def test_affine_inside_the_range(self):
        schedule = MarginSchedule()
        durations = np.linspace(1.0, 6.0, 21)
        margins = np.array([schedule.margin_for_duration(d) for d in durations])
        np.testing.assert_allclose(np.diff(margins, 2), 0.0, atol=1e-12)
        np.testing.assert_allclose(margins, 0.06 * durations + 0.14, atol=1e-12)

    def test_fixed_length_chunk_margin(self):
        schedule = MarginSchedule.from_ranges(0.2, 0.5, 1.0, 6.0)
        assert schedule.slope == pytest.approx(3 / 50)
        assert schedule.intercept == pytest.approx(7 / 50)
        assert schedule.margin_for_duration(4.0375) == pytest.approx(0.38225, abs=1e-12)
        assert schedule.margin_for_samples(64600) == pytest.approx(0.38225, abs=1e-12)

    def test_samples_use_the_sample_rate(self):
        schedule = MarginSchedule()
        assert schedule.margin_for_samples(16000) == pytest.approx(0.2)
        assert schedule.margin_for_samples(56000) == pytest.approx(0.35)
        assert schedule.margin_for_samples(96000) == pytest.approx(0.5)

    def test_from_ranges(self):
        schedule = MarginSchedule.from_ranges(0.1, 0.4, 2.0, 5.0)
        schedule.validate()
        assert schedule.slope == pytest.approx(0.1)
        assert schedule.intercept == pytest.approx(-0.1)

    def test_from_ranges_rejects_empty_duration_range(self):
        with pytest.raises(ConfigurationError):
            MarginSchedule.from_ranges(0.2, 0.5, 3.0, 3.0)

    @pytest.mark.parametrize(
        "kwargs",
        [{"slope": 0.07}, {"m_max": 1.0, "slope": 0.16, "intercept": 0.04}, {"d_min": 6.0}],
    )
    def test_inconsistent_schedules(self, kwargs):
        with pytest.raises(ConfigurationError):
            MarginSchedule(**kwargs).validate()

    def test_fixed_margin_when_almft_is_off(self):
        config = LossConfig(almft=False, fixed_margin=0.25)
        assert config.margin_for_samples(16000) == 0.25
        assert config.margin_for_samples(96000) == 0.25
        assert LossConfig().margin_for_samples(96000) == pytest.approx(0.5)


class TestWeightedCrossEntropy:
    def test_zero_logits_give_log_two(self):
        loss = weighted_ce_loss(Tensor(np.zeros((6, 2))), [0, 1, 1, 0, 0, 1])
        assert float(loss.data) == pytest.approx(np.log(2.0))

    def test_single_class_batch_reduces_to_plain_cross_entropy(self):
        rng = np.random.default_rng(0)
        logits = rng.standard_normal((5, 2))
        labels = np.ones(5, dtype=int)
        loss = weighted_ce_loss(Tensor(logits), labels, (0.1, 0.9))
        assert float(loss.data) == pytest.approx(numpy_cross_entropy(logits, labels))

    def test_weights_normalize_by_applied_total(self):
        logits = np.array([[2.0, 0.0], [0.0, 1.0]])
        labels = np.array([0, 1])
        per_sample = -np.array([np.log(1 / (1 + np.exp(-2.0))), np.log(1 / (1 + np.exp(-1.0)))])
        expected = (0.1 * per_sample[0] + 0.9 * per_sample[1]) / 1.0
        loss = weighted_ce_loss(Tensor(logits), labels, (0.1, 0.9))
        assert float(loss.data) == pytest.approx(expected)
        rescaled = weighted_ce_loss(Tensor(logits), labels, (1.0, 9.0))
        assert float(rescaled.data) == pytest.approx(expected)

    def test_non_positive_weights(self):
        with pytest.raises(ConfigurationError):
            weighted_ce_loss(Tensor(np.zeros((1, 2))), [0], (0.0, 1.0))

    def test_weight_count_must_match_classes(self):
        with pytest.raises(DimensionError):
            weighted_ce_loss(Tensor(np.zeros((1, 2))), [0], (0.2, 0.3, 0.5))


class TestScores:
    def test_am_softmax_score_is_bonafide_cosine(self):
        emb = Tensor(np.array([[1.0, 0.0], [0.0, 2.0]]))
        weights = Tensor(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(scores_from_embeddings(emb, weights, "am_softmax"), [1.0, 0.0])

    def test_weighted_ce_score_is_logit_difference(self):
        emb = Tensor(np.array([[1.0, 2.0]]))
        weights = Tensor(np.array([[1.0, 3.0], [0.0, 1.0]]))
        np.testing.assert_allclose(scores_from_embeddings(emb, weights, "weighted_ce"), [4.0])
