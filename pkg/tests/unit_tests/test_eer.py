"""Tests for the reference and sort-based EER."""

import numpy as np
import pytest

from durspoof.errors import InputError, UndefinedMetricError
from durspoof.evaluation.eer import EERResult, compute_eer, compute_eer_fast, split_scores
from durspoof.result import ScoreEntry

BOTH = [compute_eer, compute_eer_fast]


@pytest.mark.parametrize("eer_fn", BOTH)
class TestWorkedExamples:
    def test_perfect_separation(self, eer_fn):
        result = eer_fn(([2.0, 3.0], [0.0, 1.0]))
        assert result.eer == 0.0
        assert result.threshold == 2.0

    def test_fully_inverted(self, eer_fn):
        assert eer_fn(([0.0, 1.0], [2.0, 3.0])).eer == 1.0

    def test_exact_crossing(self, eer_fn):
        result = eer_fn(([1.0, 3.0, 5.0], [0.0, 2.0, 4.0]))
        assert result.eer == pytest.approx(1 / 3, abs=1e-15)
        assert result.threshold == 3.0

    def test_three_against_three(self, eer_fn):
        result = eer_fn(([0.8, 0.6, 0.4], [0.7, 0.3, 0.2]))
        assert result.eer == 1 / 3
        assert result.threshold == 0.6

    def test_interpolated_crossing(self, eer_fn):
        result = eer_fn(([0.0, 2.0], [1.0]))
        assert result.eer == pytest.approx(0.5)
        assert result.threshold == pytest.approx(1.5)

    def test_constant_scores(self, eer_fn):
        result = eer_fn(([5.0, 5.0], [5.0, 5.0, 5.0]))
        assert result.eer == pytest.approx(0.5)
        assert result.threshold == 5.0

    def test_score_entries(self, eer_fn):
        entries = [
            ScoreEntry("a", 0.9, "bonafide"),
            ScoreEntry("b", 0.1, "spoof"),
            ScoreEntry("c", 0.8, "bonafide"),
            ScoreEntry("d", 0.2, "spoof"),
        ]
        assert eer_fn(entries).eer == 0.0

    def test_single_class_is_undefined(self, eer_fn):
        with pytest.raises(UndefinedMetricError):
            eer_fn(([0.1, 0.2], []))
        with pytest.raises(UndefinedMetricError):
            eer_fn([ScoreEntry("a", 0.3, "spoof")])

    def test_non_finite_scores(self, eer_fn):
        with pytest.raises(InputError, match="finite"):
            eer_fn(([0.1, np.nan], [0.2]))

    def test_unlabeled_entry(self, eer_fn):
        with pytest.raises(InputError, match="labeled"):
            eer_fn([ScoreEntry("a", 0.3, "bonafide"), ScoreEntry("b", 0.1)])


class TestAgreement:
    """The sort-based path reproduces the reference exactly."""

    def test_random_sets_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n_b, n_s = rng.integers(1, 40, size=2)
            shift = rng.uniform(-1, 2)
            bonafide = np.round(rng.normal(shift, 1.0, n_b), 1)
            spoof = np.round(rng.normal(0.0, 1.0, n_s), 1)
            slow = compute_eer((bonafide, spoof))
            fast = compute_eer_fast((bonafide, spoof))
            assert fast.eer == slow.eer
            assert fast.threshold == slow.threshold
            assert 0.0 <= slow.eer <= 1.0

    def test_negated_scores_with_swapped_labels(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n_b, n_s = rng.integers(1, 40, size=2)
            shift = rng.uniform(-1, 2)
            bonafide = np.round(rng.normal(shift, 1.0, n_b), 1)
            spoof = np.round(rng.normal(0.0, 1.0, n_s), 1)
            base = compute_eer((bonafide, spoof)).eer
            mirrored = (-spoof, -bonafide)
            assert compute_eer(mirrored).eer == pytest.approx(base, abs=1e-12)
            assert compute_eer_fast(mirrored).eer == pytest.approx(base, abs=1e-12)

    @pytest.mark.parametrize("transform", [np.exp, lambda s: 3.0 * s + 7.0, np.arctan])
    def test_invariant_to_increasing_transforms(self, transform):
        rng = np.random.default_rng(1)
        bonafide = rng.normal(1.0, 1.0, 200)
        spoof = rng.normal(0.0, 1.0, 300)
        base = compute_eer_fast((bonafide, spoof)).eer
        assert compute_eer_fast((transform(bonafide), transform(spoof))).eer == pytest.approx(base, abs=1e-12)


class TestHelpers:
    def test_split_scores(self):
        bonafide, spoof = split_scores([ScoreEntry("a", 1.0, "bonafide"), ScoreEntry("b", 2.0, "spoof")])
        np.testing.assert_array_equal(bonafide, [1.0])
        np.testing.assert_array_equal(spoof, [2.0])

    def test_result_percent(self):
        result = EERResult(eer=0.0425, threshold=0.1)
        assert result.percent == pytest.approx(4.25)
        assert result.to_dict() == {"eer": 0.0425, "threshold": 0.1}

    def test_score_entry_rejects_non_finite(self):
        with pytest.raises(InputError):
            ScoreEntry("a", float("inf"), "spoof")
