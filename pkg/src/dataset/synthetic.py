"""
Bundled synthetic datasets.

``lowdiv`` has very few distinct samples with large frequencies; ``highdiv``
has many distinct sparse samples that each occur once.
"""

import logging
import math
from typing import Dict, List, Tuple

import numpy as np

from core.errors import ConfigurationError
from .models import SparseDataset
from .preprocessing import deduplicate


logger = logging.getLogger(__name__)

# (feature vector, raw count at scale 1, fraction of positive labels)
LOWDIV_PROTOTYPES: Tuple[Tuple[Dict[int, float], int, float], ...] = (
    ({0: 1.0}, 10000, 0.95),
    ({1: 1.0}, 20000, 0.50),
    ({0: 1.0, 1: 1.0}, 30000, 0.05),
)


def make_lowdiv(scale: float = 1.0) -> SparseDataset:
    """
    Three distinct feature vectors with frequencies in ratio 1:2:3.

    Each vector appears with both labels in a fixed mixture, so the dataset
    has six distinct (vector, label) samples rather than three. With a single
    label per vector the loss would only approach zero as scores diverge;
    the mixture gives every vector a finite optimal score and
    ``lowdiv_optimal_loss`` a value that loss thresholds can sit above.
    """
    if scale <= 0:
        raise ConfigurationError(f"scale must be positive, got {scale}")

    rows: List[Dict[int, float]] = []
    labels: List[int] = []
    frequencies: List[int] = []
    for vector, base_count, positive_rate in LOWDIV_PROTOTYPES:
        count = max(1, int(round(base_count * scale)))
        positives = int(round(count * positive_rate))
        for label, freq in ((1, positives), (0, count - positives)):
            if freq > 0:
                rows.append(dict(vector))
                labels.append(label)
                frequencies.append(freq)

    return SparseDataset.from_rows(rows, labels, frequencies, n_features=2)


def lowdiv_optimal_loss(ds: SparseDataset) -> float:
    """Per-raw-row loss of the best constant-per-vector model on a lowdiv dataset."""
    totals: Dict[Tuple[int, ...], List[int]] = {}
    for i in range(ds.n_samples):
        key = tuple(sorted(ds.sample(i)))
        pos_neg = totals.setdefault(key, [0, 0])
        pos_neg[0 if ds.labels[i] == 1 else 1] += int(ds.frequencies[i])

    loss = 0.0
    for positives, negatives in totals.values():
        count = positives + negatives
        for part in (positives, negatives):
            if part:
                loss -= part * math.log(part / count)
    return loss / ds.n_raw


def make_highdiv(
    n_samples: int = 2000,
    n_features: int = 100,
    n_noise: int = 5,
    seed: int = 0,
) -> SparseDataset:
    """
    Distinct sparse samples, each with frequency 1.

    Feature 0 is always present, uniform on (0, 1), and decides the label
    (``x0 > 0.5``). Every sample also carries ``n_noise`` random features.
    """
    if n_features < 2:
        raise ConfigurationError("highdiv needs at least 2 features")
    if not 0 <= n_noise < n_features:
        raise ConfigurationError(f"n_noise must be in [0, {n_features - 1}]")

    rng = np.random.default_rng(seed)
    signal = rng.uniform(0.0, 1.0, size=n_samples)
    rows: List[Dict[int, float]] = []
    for x0 in signal:
        noise_idx = rng.choice(np.arange(1, n_features), size=n_noise, replace=False)
        noise_val = rng.uniform(0.0, 1.0, size=n_noise)
        row = {0: float(x0)}
        row.update({int(j): float(v) for j, v in zip(noise_idx, noise_val)})
        rows.append(row)

    labels = (signal > 0.5).astype(np.int8)
    ds = SparseDataset.from_rows(rows, labels, n_features=n_features)
    return deduplicate(ds)


SYNTHETIC_PREFIX = "synthetic:"
