"""
Histogram binning of sparse features.
"""

import logging

import numpy as np

from core.errors import ConfigurationError
from .models import FeatureBins, SparseDataset


logger = logging.getLogger(__name__)

DEFAULT_MAX_BINS = 255


def _feature_thresholds(values: np.ndarray, weights: np.ndarray, max_bins: int) -> np.ndarray:
    """Upper bin boundaries for one feature's weighted value multiset."""
    distinct, inverse = np.unique(values, return_inverse=True)
    if distinct.size <= 1:
        return np.empty(0, dtype=np.float64)
    if distinct.size <= max_bins:
        # one bin per distinct value
        return distinct[:-1].astype(np.float64)

    cumulative = np.cumsum(np.bincount(inverse, weights=weights))
    targets = cumulative[-1] * np.arange(1, max_bins) / max_bins
    cuts = np.unique(np.searchsorted(cumulative, targets, side="left"))
    cuts = cuts[cuts < distinct.size - 1]
    return distinct[cuts].astype(np.float64)


def build_bins(ds: SparseDataset, max_bins: int = DEFAULT_MAX_BINS) -> FeatureBins:
    """
    Bin every feature at m-weighted quantiles of its values.

    Absent entries count as value 0 with the weight of the samples that
    lack the feature. A value v lands in the first bin whose upper boundary
    is >= v, so bin assignment is monotone in v.
    """
    if max_bins < 2:
        raise ConfigurationError(f"max_bins must be >= 2, got {max_bins}")

    csc = ds.features.tocsc()
    csc.sort_indices()
    dtype = np.uint8 if max_bins <= 256 else np.uint16
    n_raw = ds.n_raw

    thresholds = []
    zero_bins = np.zeros(ds.n_features, dtype=np.int64)
    binned = np.zeros((ds.n_samples, ds.n_features), dtype=dtype)

    for f in range(ds.n_features):
        start, stop = csc.indptr[f], csc.indptr[f + 1]
        rows = csc.indices[start:stop]
        values = csc.data[start:stop]
        weights = ds.frequencies[rows].astype(np.float64)

        zero_weight = n_raw - weights.sum()
        if zero_weight > 0:
            all_values = np.append(values, 0.0)
            all_weights = np.append(weights, zero_weight)
        else:
            all_values, all_weights = values, weights

        bounds = _feature_thresholds(all_values, all_weights, max_bins)
        bounds.flags.writeable = False
        thresholds.append(bounds)

        zero_bins[f] = np.searchsorted(bounds, 0.0, side="left")
        binned[:, f] = zero_bins[f]
        binned[rows, f] = np.searchsorted(bounds, values, side="left")

    binned.flags.writeable = False
    zero_bins.flags.writeable = False
    logger.debug("Built bins for %d features (max_bins=%d)", ds.n_features, max_bins)
    return FeatureBins(tuple(thresholds), binned, max_bins, zero_bins)
