"""
Tests for the additive model, its text form and evaluation metrics.
"""

import math

import numpy as np
import pytest

from core.errors import DimensionMismatchError, ForestFormatError
from boosting.forest import (
    Forest,
    forest_from_text,
    forest_to_text,
    init_forest,
    load_forest,
    save_forest,
    score_vector,
)
from boosting.metrics import evaluate, evaluate_scores
from boosting.tree import TreeParams, fit, predict_dataset
from dataset.binning import build_bins
from dataset.models import SparseDataset


# Test Fixtures

@pytest.fixture
def separating_forest(two_samples):
    """f0 = 0 plus one stump sending the positive sample up"""
    bins = build_bins(two_samples)
    tree = fit(bins, np.array([1.0, -1.0]), np.ones(2), TreeParams(max_leaves=2))
    return Forest(f0=0.0, n_features=1).with_tree(tree, 1.0)


@pytest.fixture
def fitted_forest(highdiv_small, highdiv_bins):
    """Three trees with different steps on the highdiv labels"""
    forest = init_forest(highdiv_small)
    rng = np.random.default_rng(4)
    n = highdiv_small.n_samples
    for k, step in enumerate((0.1, 0.05, 0.2)):
        g = np.where(highdiv_small.labels == 1, 1.0, -1.0) + rng.normal(scale=0.1, size=n)
        tree = fit(highdiv_bins, g, np.ones(n), TreeParams(max_leaves=8), draw_index=k)
        forest = forest.with_tree(tree, step)
    return forest


class TestInitForest:
    """Initial constant"""

    def test_mean_label(self, two_samples):
        assert init_forest(two_samples).f0 == pytest.approx(0.5)

    def test_weighted_mean_label(self, weighted_pair):
        assert init_forest(weighted_pair).f0 == pytest.approx(0.75)

    def test_all_positive(self):
        ds = SparseDataset.from_rows([{0: 1.0}, {0: 2.0}], [1, 1], n_features=1)
        forest = init_forest(ds)
        assert forest.f0 == pytest.approx(1.0)
        assert len(forest) == 0
        assert forest.fingerprint == ds.fingerprint()


class TestScoreVector:
    """F_i = f0 + sum of step-scaled trees"""

    def test_empty_forest(self, weighted_pair):
        forest = init_forest(weighted_pair)
        np.testing.assert_array_equal(score_vector(forest, weighted_pair), [0.75, 0.75])

    def test_additivity(self, fitted_forest, highdiv_small):
        """Appending a tree moves scores by exactly step * tree(x)"""
        before = score_vector(fitted_forest.truncated(2), highdiv_small)
        tree, step = fitted_forest.trees[2]
        after = score_vector(fitted_forest, highdiv_small)
        np.testing.assert_allclose(after - before, step * predict_dataset(tree, highdiv_small), atol=1e-12)

    def test_row_permutation(self, fitted_forest, highdiv_small):
        order = np.random.default_rng(0).permutation(highdiv_small.n_samples)
        shuffled = highdiv_small.subset(order)
        np.testing.assert_array_equal(
            score_vector(fitted_forest, shuffled),
            score_vector(fitted_forest, highdiv_small)[order],
        )

    def test_narrower_dataset_is_padded(self, separating_forest):
        """Features the dataset lacks are zero"""
        forest = Forest(f0=0.0, trees=separating_forest.trees, n_features=3)
        ds = SparseDataset.from_rows([{0: 2.0}], [0], n_features=1)
        np.testing.assert_allclose(score_vector(forest, ds), [-1.0])

    def test_wider_dataset_is_rejected(self, separating_forest):
        ds = SparseDataset.from_rows([{0: 1.0, 4: 1.0}], [1], n_features=5)
        with pytest.raises(DimensionMismatchError):
            score_vector(separating_forest, ds)


class TestForestText:
    """Forest file format"""

    def test_round_trip(self, fitted_forest, highdiv_small):
        text = forest_to_text(fitted_forest)
        back = forest_from_text(text)

        assert forest_to_text(back) == text
        assert back.f0 == fitted_forest.f0
        assert back.fingerprint == highdiv_small.fingerprint()
        assert [step for _, step in back.trees] == [0.1, 0.05, 0.2]
        np.testing.assert_array_equal(
            score_vector(back, highdiv_small),
            score_vector(fitted_forest, highdiv_small),
        )

    def test_file_round_trip(self, fitted_forest, tmp_path):
        path = save_forest(fitted_forest, tmp_path / "run" / "forest.txt")
        assert forest_to_text(load_forest(path)) == forest_to_text(fitted_forest)

    @pytest.mark.parametrize("text", [
        "",
        "\n\n",
        "forest\n",
        "forest\nf0=0.5\nfingerprint=\nn_features=1\nn_trees=1\n",
        "forest\nf0=abc\nfingerprint=\nn_features=1\nn_trees=0\n",
        "forest\nf0=0.5\nfingerprint=\nn_features=1\nn_trees=0\nextra\n",
        "forest\nf0=0.5\nfingerprint=\nn_features=1\nn_trees=1\ntree nodes=1 draw=0\n0 leaf 1.0\n",
    ])
    def test_malformed(self, text):
        with pytest.raises(ForestFormatError):
            forest_from_text(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ForestFormatError, match="not found"):
            load_forest(tmp_path / "absent.txt")


class TestMetrics:
    """Loss, accuracy and AUC"""

    def test_keys(self, separating_forest, two_samples):
        assert set(evaluate(separating_forest, two_samples).as_dict()) == {"loss", "accuracy", "auc"}

    def test_uninformative_model(self, two_samples):
        """A constant score on balanced labels has accuracy 0.5 and AUC 0.5"""
        metrics = evaluate(init_forest(two_samples), two_samples)
        assert metrics.accuracy == pytest.approx(0.5)
        assert metrics.auc == pytest.approx(0.5)

    def test_perfect_separation(self, separating_forest, two_samples):
        metrics = evaluate(separating_forest, two_samples)
        assert metrics.accuracy == 1.0
        assert metrics.auc == 1.0

    def test_log_two_at_zero_scores(self, two_samples):
        metrics = evaluate(Forest(f0=0.0, n_features=1), two_samples)
        assert metrics.loss == pytest.approx(math.log(2.0))

    def test_frequencies_weight_accuracy(self, weighted_pair):
        """Predicting everything positive is right for 3 of 4 raw rows"""
        metrics = evaluate_scores(weighted_pair, np.array([1.0, 1.0]))
        assert metrics.accuracy == pytest.approx(0.75)

    def test_single_class_auc_is_nan(self):
        ds = SparseDataset.from_rows([{0: 1.0}, {0: 2.0}], [1, 1], n_features=1)
        assert math.isnan(evaluate_scores(ds, np.array([0.3, -0.2])).auc)
