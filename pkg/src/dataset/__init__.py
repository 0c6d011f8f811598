"""
Sparse dataset ingestion, deduplication and histogram binning.
"""

from .binning import DEFAULT_MAX_BINS, build_bins
from .libsvm import parse_libsvm, read_libsvm, serialize_libsvm, write_libsvm
from .models import FeatureBins, SparseDataset
from .preprocessing import dataset_stats, deduplicate, split_train_test
from .synthetic import (
    SYNTHETIC_PREFIX,
    lowdiv_optimal_loss,
    make_highdiv,
    make_lowdiv,
)

__all__ = [
    "DEFAULT_MAX_BINS",
    "FeatureBins",
    "SYNTHETIC_PREFIX",
    "SparseDataset",
    "build_bins",
    "dataset_stats",
    "deduplicate",
    "lowdiv_optimal_loss",
    "make_highdiv",
    "make_lowdiv",
    "parse_libsvm",
    "read_libsvm",
    "serialize_libsvm",
    "split_train_test",
    "write_libsvm",
]
