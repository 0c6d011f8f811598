"""
Desk-scale experiments: convergence, staleness sweeps and throughput.

These train hundreds of trees; deselect with ``-m "not slow"``.
"""

from dataclasses import replace

import numpy as np
import pytest

from boosting.loss import gradient_vector, mean_loss
from boosting.metrics import evaluate
from boosting.sampler import SamplingPlan, draw, weighted_target
from boosting.tree import TreeParams
from dataset.binning import build_bins
from dataset.preprocessing import split_train_test
from dataset.synthetic import lowdiv_optimal_loss, make_highdiv, make_lowdiv
from theory.calculator import max_workers
from training.config import TrainConfig, TrainMode
from training.sweep import run_sweep, slowdown
from training.trainer import train_async, train_serial


pytestmark = pytest.mark.slow


# Test Fixtures

@pytest.fixture(scope="module")
def lowdiv():
    return make_lowdiv(scale=10)


@pytest.fixture(scope="module")
def highdiv():
    return make_highdiv(n_samples=2000, n_features=100, seed=0)


@pytest.fixture
def sweep_config():
    return TrainConfig(n_trees=400, step=1.0, rate=0.6, tree=TreeParams(max_leaves=16))


class TestSampledMinimizer:
    """The sampled objective has the same minimizer as the full one"""

    def test_fixed_partition(self, five_samples):
        leaf_of = np.array([0, 0, 1, 1, 1])
        n_raw = five_samples.n_raw

        def leaf_gradient(g):
            return np.bincount(leaf_of, weights=g, minlength=2) / n_raw

        theta = np.zeros(2)
        for _ in range(5000):
            theta -= 0.05 * leaf_gradient(gradient_vector(five_samples, theta[leaf_of]).values)
        full_loss = mean_loss(five_samples, theta[leaf_of])

        plan = SamplingPlan.uniform(0.5, five_samples)
        steps = 100_000
        sgd = np.zeros(2)
        average = np.zeros(2)
        for t in range(steps):
            d = draw(plan, five_samples, seed=0, index=t)
            g = weighted_target(d, five_samples, sgd[leaf_of]).values
            sgd -= 0.1 / (1.0 + t / 100.0) ** 0.6 * leaf_gradient(g)
            if t >= steps // 2:
                average += sgd
        average /= steps - steps // 2

        assert np.linalg.norm(average - theta) < 0.05
        assert abs(mean_loss(five_samples, average[leaf_of]) - full_loss) < 1e-3


class TestSerialConvergence:
    def test_highdiv_fits(self, highdiv):
        train, test = split_train_test(highdiv, 0.2, seed=0)
        config = TrainConfig(n_trees=200, step=0.1, tree=TreeParams(max_leaves=16), mode=TrainMode.SERIAL)
        forest, history = train_serial(train, config, test=test)

        assert history.final_train_loss() <= 0.15
        assert evaluate(forest, test).accuracy >= 0.95


class TestStalenessSweeps:
    """Updates-to-threshold against worker count and sampling rate"""

    def test_low_diversity_slows_down(self, lowdiv, sweep_config):
        threshold = lowdiv_optimal_loss(lowdiv) + 3e-6
        cells = run_sweep(lowdiv, sweep_config, "workers", [1, 16], threshold)

        assert not cells[0].saturated
        assert slowdown(cells, 16) >= 4.0

    def test_high_diversity_tolerates_workers(self, highdiv, sweep_config):
        cells = run_sweep(highdiv, sweep_config, "workers", [1, 16], threshold=0.2)
        assert slowdown(cells, 16) <= 1.5

    def test_lower_rate_needs_more_updates(self, lowdiv, sweep_config):
        threshold = lowdiv_optimal_loss(lowdiv) + 3e-6
        by_rate = {}
        for rate in (0.01, 0.6):
            config = replace(sweep_config, rate=rate)
            by_rate[rate] = run_sweep(lowdiv, config, "workers", [1, 16], threshold)

        single = {rate: cells[0].updates_to_threshold for rate, cells in by_rate.items()}
        assert single[0.01] >= single[0.6]
        assert slowdown(by_rate[0.01], 16) <= slowdown(by_rate[0.6], 16)


class TestThroughput:
    """Virtual-time throughput with build time 10 and target time 1"""

    def _throughput(self, ds, workers):
        config = TrainConfig(n_trees=200, step=0.1, rate=0.5, tree=TreeParams(max_leaves=4), n_workers=workers)
        _, history = train_async(ds, config, bins=build_bins(ds))
        return history.throughput()

    def test_scaling(self, lowdiv_small):
        single = self._throughput(lowdiv_small, 1)
        assert single == pytest.approx(1.0 / 11.0)

        assert self._throughput(lowdiv_small, 8) / single >= 6.0
        saturated = self._throughput(lowdiv_small, 16) / single
        assert saturated == pytest.approx(max_workers(10.0, 1.0), rel=0.2)


class TestThreadedRun:
    def test_eight_threads(self, highdiv_small):
        config = TrainConfig(
            n_trees=200, step=0.1, rate=0.5, tree=TreeParams(max_leaves=8),
            n_workers=8, mode=TrainMode.THREADS,
        )
        forest, history = train_async(highdiv_small, config)

        assert len(forest) == 200
        assert [r.update for r in history] == list(range(1, 201))
        assert history.max_staleness() <= config.staleness_limit
        assert history.final_train_loss() < history.initial_train_loss
