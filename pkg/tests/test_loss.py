"""
Tests for the logistic loss and gradient vectors.
"""

import math

import numpy as np
import pytest

from core.errors import DimensionMismatchError
from boosting.loss import (
    PROB_EPS,
    GradientFlavor,
    GradientVector,
    gradient_vector,
    logistic_gradient,
    logistic_loss,
    mean_loss,
    probability,
    total_loss,
)


GRID = np.linspace(-4.0, 4.0, 33)


class TestLogisticLoss:
    """Per-sample loss and its derivative"""

    @pytest.mark.parametrize("y", [0, 1])
    def test_log_two_at_zero(self, y):
        assert logistic_loss(y, 0.0) == pytest.approx(math.log(2.0))

    def test_gradient_at_zero(self):
        assert logistic_gradient(1, 0.0) == pytest.approx(-1.0)
        assert logistic_gradient(0, 0.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("y", [0, 1])
    def test_gradient_matches_finite_differences(self, y):
        """Central differences agree with 2(p - y) to 1e-5 relative"""
        h = 1e-5
        numeric = (logistic_loss(y, GRID + h) - logistic_loss(y, GRID - h)) / (2 * h)
        analytic = logistic_gradient(y, GRID)
        relative = np.abs(numeric - analytic) / np.maximum(np.abs(analytic), 1e-12)
        assert relative.max() <= 1e-5

    @pytest.mark.parametrize("y", [0, 1])
    def test_convex(self, y):
        values = logistic_loss(y, GRID)
        assert np.all(np.diff(values, 2) >= -1e-12)

    def test_gradient_bounded_by_two(self):
        F = np.linspace(-50, 50, 101)
        for y in (0, 1):
            assert np.all(np.abs(logistic_gradient(y, F)) <= 2.0)

    def test_extreme_scores_stay_finite(self):
        """Clamping keeps the loss finite for saturated scores"""
        assert probability(1000.0) <= 1.0 - PROB_EPS
        assert math.isfinite(logistic_loss(0, 1000.0))
        assert math.isfinite(logistic_loss(1, -1000.0))

    def test_vectorized(self):
        losses = logistic_loss(np.array([0, 1]), np.array([0.0, 0.0]))
        np.testing.assert_allclose(losses, [math.log(2.0)] * 2)


class TestDatasetLoss:
    """Frequency-weighted totals"""

    def test_total_and_mean(self, weighted_pair):
        F = np.zeros(2)
        assert total_loss(weighted_pair, F) == pytest.approx(4 * math.log(2.0))
        assert mean_loss(weighted_pair, F) == pytest.approx(math.log(2.0))

    def test_score_length_checked(self, weighted_pair):
        with pytest.raises(DimensionMismatchError):
            total_loss(weighted_pair, np.zeros(3))


class TestGradientVector:
    """Full and sampled gradient components"""

    def test_full_gradient(self, weighted_pair):
        """Components are m_i * 2(p_i - y_i)"""
        G = gradient_vector(weighted_pair, np.zeros(2))

        assert G.flavor is GradientFlavor.FULL
        np.testing.assert_allclose(G.values, [-3.0, 1.0])
        assert G.n_included == 2

    def test_sampled_gradient(self, weighted_pair):
        """Weights replace frequencies and unsampled rows are excluded"""
        G = gradient_vector(weighted_pair, np.zeros(2), weights=np.array([0.0, 2.5]))

        assert G.flavor is GradientFlavor.SAMPLED
        np.testing.assert_allclose(G.values, [0.0, 2.5])
        assert list(G.included) == [False, True]

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            GradientVector(np.array([np.nan]), GradientFlavor.FULL, np.array([True]))

    def test_weight_length_checked(self, weighted_pair):
        with pytest.raises(DimensionMismatchError):
            gradient_vector(weighted_pair, np.zeros(2), weights=np.ones(3))
