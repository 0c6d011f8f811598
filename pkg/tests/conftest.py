"""
Shared fixtures for the staleboost test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from dataset.binning import build_bins
from dataset.models import SparseDataset
from dataset.synthetic import make_highdiv, make_lowdiv


# Test Fixtures

@pytest.fixture
def two_samples():
    """Two distinct one-feature samples with opposite labels"""
    return SparseDataset.from_rows([{0: 1.0}, {0: 2.0}], [1, 0], n_features=1)


@pytest.fixture
def weighted_pair():
    """Same two samples, the positive one standing for three raw rows"""
    return SparseDataset.from_rows([{0: 1.0}, {0: 2.0}], [1, 0], frequencies=[3, 1], n_features=1)


@pytest.fixture
def distinct_twenty():
    """Twenty distinct samples on one feature with mixed labels"""
    rows = [{0: float(i + 1)} for i in range(20)]
    labels = [1 if i % 3 else 0 for i in range(20)]
    return SparseDataset.from_rows(rows, labels, n_features=1)


@pytest.fixture
def five_samples():
    """Five distinct samples with varied frequencies and both labels"""
    rows = [{0: 1.0}, {1: 1.0}, {0: 1.0, 1: 1.0}, {0: 2.0}, {1: 3.0}]
    return SparseDataset.from_rows(rows, [1, 0, 1, 0, 1], frequencies=[2, 1, 3, 1, 2], n_features=2)


@pytest.fixture
def fifty_samples():
    """Fifty distinct samples with frequencies cycling through 1..5"""
    rng = np.random.default_rng(7)
    rows = [{0: float(i), 1: float(rng.uniform())} for i in range(1, 51)]
    labels = rng.integers(0, 2, size=50)
    frequencies = [1 + i % 5 for i in range(50)]
    return SparseDataset.from_rows(rows, labels, frequencies=frequencies, n_features=2)


@pytest.fixture
def lowdiv_small():
    """lowdiv at 1% scale: 600 raw rows over 6 distinct samples"""
    return make_lowdiv(scale=0.01)


@pytest.fixture
def highdiv_small():
    """A 200-sample highdiv dataset"""
    return make_highdiv(n_samples=200, n_features=20, n_noise=3, seed=1)


@pytest.fixture
def highdiv_bins(highdiv_small):
    return build_bins(highdiv_small)
