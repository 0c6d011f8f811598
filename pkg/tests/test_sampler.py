"""
Tests for Bernoulli subsampling and diversity statistics.
"""

import numpy as np
import pytest

from core.errors import DimensionMismatchError, SamplingError
from boosting.loss import GradientFlavor, logistic_gradient
from boosting.sampler import (
    SamplingPlan,
    analytic_delta,
    draw,
    estimate_diversity,
    support_draws,
    weighted_target,
)
from dataset.models import SparseDataset


# Test Fixtures

@pytest.fixture
def singles():
    """Two distinct samples, one raw row each"""
    return SparseDataset.from_rows([{0: 1.0}, {0: 2.0}], [1, 0], n_features=1)


@pytest.fixture
def uneven():
    """Two samples with one and two raw rows"""
    return SparseDataset.from_rows([{0: 1.0}, {0: 2.0}], [1, 0], frequencies=[1, 2], n_features=1)


class TestSamplingPlan:
    """Plan construction and validation"""

    @pytest.mark.parametrize("rate", [0.0, -0.1, 1.5])
    def test_rate_out_of_range(self, singles, rate):
        with pytest.raises(SamplingError):
            SamplingPlan.uniform(rate, singles)

    def test_per_sample_expands_replicas(self, uneven):
        plan = SamplingPlan.per_sample(np.array([0.3, 0.5]), uneven)
        np.testing.assert_allclose(plan.rates, [0.3, 0.5, 0.5])
        assert not plan.is_full

    def test_plan_must_match_dataset(self, singles, uneven):
        plan = SamplingPlan.uniform(0.5, singles)
        with pytest.raises(DimensionMismatchError):
            plan.check(uneven)


class TestDraw:
    """Single draws of Q"""

    def test_full_rate_keeps_everything(self, fifty_samples):
        """R = 1 yields m' = m and includes every sample"""
        plan = SamplingPlan.uniform(1.0, fifty_samples)
        d = draw(plan, fifty_samples, seed=0, index=0)

        np.testing.assert_array_equal(d.weights, fifty_samples.frequencies)
        assert d.support_size == fifty_samples.n_samples

    def test_half_rate_weights(self, singles):
        """A kept single row at R = 0.5 weighs 2"""
        plan = SamplingPlan.uniform(0.5, singles)
        for index in range(20):
            d = draw(plan, singles, seed=1, index=index)
            assert set(np.unique(d.weights)) <= {0.0, 2.0}
            np.testing.assert_array_equal(d.included, d.weights > 0)

    def test_deterministic(self, fifty_samples):
        """(seed, index) fully determines a draw"""
        plan = SamplingPlan.uniform(0.5, fifty_samples)
        a = draw(plan, fifty_samples, seed=9, index=4)
        b = draw(plan, fifty_samples, seed=9, index=4)
        c = draw(plan, fifty_samples, seed=9, index=5)

        np.testing.assert_array_equal(a.bits, b.bits)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert not np.array_equal(a.bits, c.bits)

    def test_row_bits_ignore_other_rates(self, fifty_samples):
        """Changing some rows' rates leaves every other row's bit as it was"""
        n = fifty_samples.n_samples
        rates = np.full(n, 0.5)
        changed = rates.copy()
        changed[::3] = 0.9
        a = draw(SamplingPlan.per_sample(rates, fifty_samples), fifty_samples, seed=2, index=6, resample_empty=False)
        b = draw(SamplingPlan.per_sample(changed, fifty_samples), fifty_samples, seed=2, index=6, resample_empty=False)

        untouched = np.repeat(changed == rates, fifty_samples.frequencies)
        np.testing.assert_array_equal(a.bits[untouched], b.bits[untouched])
        assert np.all(b.bits[a.bits])

    def test_empty_draw_is_resampled(self):
        """A draw that keeps nothing is repeated with a higher attempt"""
        ds = SparseDataset.from_rows([{0: 1.0}], [1], n_features=1)
        plan = SamplingPlan.uniform(0.01, ds)
        d = draw(plan, ds, seed=0, index=0)

        assert d.support_size == 1
        assert d.weights[0] == pytest.approx(100.0)
        replay = draw(plan, ds, seed=0, index=0)
        assert replay.attempt == d.attempt

    def test_raw_draw_keeps_first_attempt(self):
        ds = SparseDataset.from_rows([{0: 1.0}], [1], n_features=1)
        plan = SamplingPlan.uniform(0.01, ds)
        assert draw(plan, ds, seed=0, index=0, resample_empty=False).attempt == 0

    def test_unbiased_weights(self, fifty_samples):
        """Mean of m'_i over 10000 draws is within 4 standard errors of m_i"""
        rate = 0.5
        trials = 10_000
        plan = SamplingPlan.uniform(rate, fifty_samples)
        total = np.zeros(fifty_samples.n_samples)
        for index in range(trials):
            total += draw(plan, fifty_samples, seed=2, index=index, resample_empty=False).weights

        m = fifty_samples.frequencies.astype(float)
        standard_error = np.sqrt(m * (1.0 / rate - 1.0) / trials)
        assert np.all(np.abs(total / trials - m) <= 4 * standard_error)

    def test_weighted_target(self, weighted_pair):
        """Sampled target components are m'_i * 2(p_i - y_i)"""
        plan = SamplingPlan.uniform(0.5, weighted_pair)
        d = draw(plan, weighted_pair, seed=0, index=3)
        F = np.array([0.2, -0.1])
        target = weighted_target(d, weighted_pair, F)

        expected = d.weights * logistic_gradient(weighted_pair.labels, F)
        np.testing.assert_allclose(target.values, expected)
        assert target.flavor is GradientFlavor.SAMPLED
        np.testing.assert_array_equal(target.included, d.included)


class TestDiversity:
    """Omega, delta and rho"""

    def test_analytic_delta(self, singles, uneven):
        """delta = max_i 1 - prod_j (1 - R_ij)"""
        assert analytic_delta(SamplingPlan.uniform(0.3, singles), singles) == pytest.approx(0.3)
        assert analytic_delta(SamplingPlan.uniform(0.5, uneven), uneven) == pytest.approx(0.75)
        assert analytic_delta(SamplingPlan.uniform(1.0, uneven), uneven) == pytest.approx(1.0)

    def test_full_rate(self, fifty_samples):
        stats = estimate_diversity(SamplingPlan.uniform(1.0, fifty_samples), fifty_samples, trials=10)
        assert stats.omega == 50
        assert stats.rho == 1.0
        assert stats.delta == 1.0
        assert stats.mean_support == 50.0

    def test_rho_two_singletons(self, singles):
        """Two draws of two rows at R = 0.5 intersect with probability 7/16"""
        plan = SamplingPlan.uniform(0.5, singles)
        stats = estimate_diversity(plan, singles, trials=2000, seed=3)
        assert stats.rho == pytest.approx(0.4375, abs=0.05)
        assert stats.omega <= 2

    def test_needs_two_trials(self, singles):
        with pytest.raises(SamplingError):
            estimate_diversity(SamplingPlan.uniform(0.5, singles), singles, trials=1)

    def test_support_draws_match_estimate(self, fifty_samples):
        """The yielded draws are the ones the estimate inspects"""
        plan = SamplingPlan.uniform(0.2, fifty_samples)
        stats = estimate_diversity(plan, fifty_samples, trials=30, seed=4)
        supports = [d.support_size for d in support_draws(plan, fifty_samples, 30, 4)]
        assert max(supports) == stats.omega
        assert np.mean(supports) == pytest.approx(stats.mean_support)

    def test_delta_grows_with_rates(self):
        """Raising any rate never lowers delta"""
        rng = np.random.default_rng(9)
        ds = SparseDataset.from_rows(
            [{0: float(i + 1)} for i in range(12)], [i % 2 for i in range(12)],
            frequencies=rng.integers(1, 4, size=12), n_features=1,
        )
        for _ in range(50):
            rates = rng.uniform(0.01, 0.9, size=12)
            raised = np.minimum(rates + rng.uniform(0.0, 0.5, size=12) * (rng.random(12) < 0.5), 1.0)
            before = analytic_delta(SamplingPlan.per_sample(rates, ds), ds)
            after = analytic_delta(SamplingPlan.per_sample(raised, ds), ds)
            assert after >= before

    def test_low_rate_on_many_samples(self):
        """At R = 1e-3 over 10^4 distinct samples draws are small and rarely overlap"""
        n = 10_000
        ds = SparseDataset.from_rows([{0: float(i + 1)} for i in range(n)], [i % 2 for i in range(n)], n_features=1)
        stats = estimate_diversity(SamplingPlan.uniform(1e-3, ds), ds, trials=200, seed=2)

        assert 0 < stats.omega < 50
        assert stats.mean_support == pytest.approx(10.0, rel=0.3)
        assert stats.rho < 0.1
        assert stats.delta == pytest.approx(1e-3)
