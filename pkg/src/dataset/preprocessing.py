"""
Deduplication, train/test splitting and summary statistics.
"""

import logging
from typing import Dict, Tuple, Union

import numpy as np

from core.errors import ConfigurationError, DatasetError, EmptyPartitionError
from .models import SparseDataset


logger = logging.getLogger(__name__)


def deduplicate(raw: SparseDataset) -> SparseDataset:
    """
    Merge identical (feature vector, label) rows into one sample.

    Identity is exact: same label, same indices, bitwise-equal values.
    The merged frequency is the sum of the merged rows' frequencies, and
    samples keep the order of their first occurrence.
    """
    first_index: Dict[tuple, int] = {}
    keep = []
    counts = []
    for i in range(raw.n_samples):
        key = raw.row_key(i)
        slot = first_index.get(key)
        if slot is None:
            first_index[key] = len(keep)
            keep.append(i)
            counts.append(int(raw.frequencies[i]))
        else:
            counts[slot] += int(raw.frequencies[i])

    deduped = raw.subset(np.asarray(keep, dtype=np.int64), np.asarray(counts, dtype=np.int64))
    logger.info(
        "Deduplicated %d rows into %d distinct samples (n_raw=%d)",
        raw.n_samples, deduped.n_samples, deduped.n_raw,
    )
    return deduped


def _collapse(ds: SparseDataset, owners: np.ndarray) -> SparseDataset:
    """Dataset of the raw rows owned by ``owners``, in first-occurrence order."""
    unique, first, counts = np.unique(owners, return_index=True, return_counts=True)
    order = np.argsort(first, kind="stable")
    return deduplicate(ds.subset(unique[order], counts[order]))


def split_train_test(
    ds: SparseDataset,
    test_fraction: float,
    seed: int,
) -> Tuple[SparseDataset, SparseDataset]:
    """
    Split raw rows into disjoint train and test parts by a seeded shuffle.

    The test part receives ``round(test_fraction * n_raw)`` raw rows (Python
    rounding, half to even); each part is deduplicated again.

    Raises:
        ConfigurationError: If test_fraction is outside (0, 1)
        EmptyPartitionError: If either part would be empty
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigurationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if ds.n_samples == 0:
        raise DatasetError("cannot split an empty dataset")

    n_raw = ds.n_raw
    n_test = int(round(test_fraction * n_raw))
    if n_test == 0 or n_test == n_raw:
        raise EmptyPartitionError(
            f"test_fraction {test_fraction} on {n_raw} rows leaves an empty part "
            f"({n_raw - n_test} train / {n_test} test)"
        )

    owners = np.repeat(np.arange(ds.n_samples, dtype=np.int64), ds.frequencies)
    shuffled = owners[np.random.default_rng(seed).permutation(n_raw)]
    train = _collapse(ds, shuffled[n_test:])
    test = _collapse(ds, shuffled[:n_test])
    logger.info("Split %d rows into %d train / %d test", n_raw, train.n_raw, test.n_raw)
    return train, test


def dataset_stats(ds: SparseDataset) -> Dict[str, Union[int, float]]:
    """Key-value summary: n_samples, n_raw, n_features, duplication_ratio."""
    n_raw = ds.n_raw
    return {
        "n_samples": ds.n_samples,
        "n_raw": n_raw,
        "n_features": ds.n_features,
        "duplication_ratio": (1.0 - ds.n_samples / n_raw) if n_raw else 0.0,
    }
