"""
Data models for deduplicated sparse training data.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from core.errors import DatasetError


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class SparseDataset:
    """
    Sparse binary-labelled samples with per-sample frequencies.

    Row i of ``features`` is the feature vector x_i (zero entries implicit),
    ``labels[i]`` is y_i in {0, 1} and ``frequencies[i]`` is m_i, the number
    of raw rows the sample stands for.
    """
    features: sp.csr_matrix
    labels: np.ndarray
    frequencies: np.ndarray
    n_features: int

    def __post_init__(self):
        features = sp.csr_matrix(self.features, dtype=np.float64)
        features.sort_indices()
        labels = np.asarray(self.labels, dtype=np.int8).copy()
        frequencies = np.asarray(self.frequencies, dtype=np.int64).copy()

        n = features.shape[0]
        if labels.shape != (n,) or frequencies.shape != (n,):
            raise DatasetError(
                f"labels/frequencies must have length {n}, "
                f"got {labels.shape} and {frequencies.shape}"
            )
        if features.shape[1] != self.n_features:
            raise DatasetError(
                f"feature matrix has {features.shape[1]} columns, "
                f"n_features is {self.n_features}"
            )
        if n and not np.isin(labels, (0, 1)).all():
            raise DatasetError("labels must be 0 or 1")
        if n and frequencies.min() < 1:
            raise DatasetError("every frequency must be >= 1")
        if not np.isfinite(features.data).all():
            raise DatasetError("feature values must be finite")

        for array in (features.data, features.indices, features.indptr):
            _freeze(array)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", _freeze(labels))
        object.__setattr__(self, "frequencies", _freeze(frequencies))

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Dict[int, float]],
        labels: Sequence[int],
        frequencies: Optional[Sequence[int]] = None,
        n_features: Optional[int] = None,
    ) -> "SparseDataset":
        """Build a dataset from zero-based ``{feature: value}`` rows."""
        indptr = [0]
        indices = []
        data = []
        for row in rows:
            for index in sorted(row):
                value = float(row[index])
                if value != 0.0:
                    indices.append(index)
                    data.append(value)
            indptr.append(len(indices))

        width = max(indices) + 1 if indices else 0
        if n_features is None:
            n_features = width
        elif width > n_features:
            raise DatasetError(f"feature index {width - 1} >= n_features {n_features}")

        matrix = sp.csr_matrix(
            (np.asarray(data, dtype=np.float64),
             np.asarray(indices, dtype=np.int64),
             np.asarray(indptr, dtype=np.int64)),
            shape=(len(rows), n_features),
        )
        if frequencies is None:
            frequencies = np.ones(len(rows), dtype=np.int64)
        return cls(matrix, np.asarray(labels), np.asarray(frequencies), n_features)

    @property
    def n_samples(self) -> int:
        """Number of distinct samples N."""
        return self.features.shape[0]

    @property
    def n_raw(self) -> int:
        """Original row count, the sum of frequencies."""
        return int(self.frequencies.sum())

    def __len__(self) -> int:
        return self.n_samples

    def sample(self, i: int) -> Dict[int, float]:
        """Sparse feature vector of sample ``i`` as ``{index: value}``."""
        start, stop = self.features.indptr[i], self.features.indptr[i + 1]
        return {
            int(j): float(v)
            for j, v in zip(self.features.indices[start:stop], self.features.data[start:stop])
        }

    def row_key(self, i: int) -> Tuple[int, bytes, bytes]:
        """Exact identity of sample ``i``: label, index bytes, value bits."""
        start, stop = self.features.indptr[i], self.features.indptr[i + 1]
        return (
            int(self.labels[i]),
            self.features.indices[start:stop].astype(np.int64).tobytes(),
            self.features.data[start:stop].tobytes(),
        )

    def replica_offsets(self) -> np.ndarray:
        """Start offset of each sample's replicas in the flattened raw rows (length N + 1)."""
        offsets = np.zeros(self.n_samples + 1, dtype=np.int64)
        np.cumsum(self.frequencies, out=offsets[1:])
        return offsets

    def subset(
        self,
        indices: np.ndarray,
        frequencies: Optional[np.ndarray] = None,
    ) -> "SparseDataset":
        """Dataset made of the given samples, optionally with new frequencies."""
        indices = np.asarray(indices, dtype=np.int64)
        if frequencies is None:
            frequencies = self.frequencies[indices]
        return SparseDataset(
            self.features[indices],
            self.labels[indices],
            frequencies,
            self.n_features,
        )

    def fingerprint(self) -> str:
        """SHA-256 over the dataset's arrays, used to tie a forest to its data."""
        digest = hashlib.sha256()
        digest.update(np.int64(self.n_features).tobytes())
        for array in (
            self.features.indptr.astype(np.int64),
            self.features.indices.astype(np.int64),
            self.features.data,
            self.labels,
            self.frequencies,
        ):
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()

    def equals(self, other: "SparseDataset") -> bool:
        """Exact equality of samples, labels, frequencies and width."""
        return (
            self.n_features == other.n_features
            and self.n_samples == other.n_samples
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.frequencies, other.frequencies)
            and np.array_equal(self.features.indptr, other.features.indptr)
            and np.array_equal(self.features.indices, other.features.indices)
            and np.array_equal(self.features.data, other.features.data)
        )


@dataclass(frozen=True, eq=False)
class FeatureBins:
    """
    Histogram binning of a dataset.

    ``thresholds[f]`` holds the strictly increasing upper boundaries of
    feature f: a value v falls in bin b when thresholds[f][b-1] < v <= thresholds[f][b].
    ``binned[i, f]`` is the bin of sample i's value of feature f (0 when absent).
    """
    thresholds: Tuple[np.ndarray, ...]
    binned: np.ndarray
    max_bins: int
    zero_bins: np.ndarray = field(repr=False)

    @property
    def n_features(self) -> int:
        return len(self.thresholds)

    @property
    def n_samples(self) -> int:
        return self.binned.shape[0]

    def n_bins(self, feature: int) -> int:
        return len(self.thresholds[feature]) + 1

    def bin_of(self, feature: int, value: float) -> int:
        """Bin index of ``value`` for ``feature``; values beyond the last boundary land in the last bin."""
        return int(np.searchsorted(self.thresholds[feature], value, side="left"))

    def threshold_value(self, feature: int, bin_index: int) -> float:
        """Upper boundary of ``bin_index``: samples with value <= it go left."""
        return float(self.thresholds[feature][bin_index])
