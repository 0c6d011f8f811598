"""
Logistic loss on scores F with p = 1 / (1 + exp(-2F)).

The loss of a label y in {0, 1} is -[y log p + (1 - y) log(1 - p)] and its
derivative in F is 2(p - y).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.special import expit

from core.errors import DimensionMismatchError
from dataset.models import SparseDataset


PROB_EPS = 1e-15

ArrayLike = Union[float, np.ndarray]

# Per-distinct-sample scores F_i.
ScoreVector = np.ndarray


class GradientFlavor(str, Enum):
    """Which objective a gradient vector belongs to"""
    FULL = "full"
    SAMPLED = "sampled"


@dataclass(frozen=True, eq=False)
class GradientVector:
    """
    Per-distinct-sample gradient components.

    ``included`` marks the samples a tree may see; for the full gradient every
    sample is included, for a sampled target only those drawn at least once.
    """
    values: np.ndarray
    flavor: GradientFlavor
    included: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        included = np.asarray(self.included, dtype=bool)
        if included.shape != values.shape:
            raise DimensionMismatchError(values.size, included.size, "inclusion mask")
        if not np.isfinite(values).all():
            raise ValueError("gradient components must be finite")
        values.flags.writeable = False
        included.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "included", included)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n_included(self) -> int:
        return int(self.included.sum())


def probability(F: ArrayLike) -> ArrayLike:
    """p = 1 / (1 + exp(-2F)), clamped to [PROB_EPS, 1 - PROB_EPS]."""
    return np.clip(expit(2.0 * np.asarray(F, dtype=np.float64)), PROB_EPS, 1.0 - PROB_EPS)


def logistic_loss(y: ArrayLike, F: ArrayLike) -> ArrayLike:
    """Per-sample loss; vectorized over y and F."""
    p = probability(F)
    y = np.asarray(y, dtype=np.float64)
    loss = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(loss) if np.ndim(loss) == 0 else loss


def logistic_gradient(y: ArrayLike, F: ArrayLike) -> ArrayLike:
    """Per-sample derivative 2(p - y); vectorized over y and F."""
    grad = 2.0 * (probability(F) - np.asarray(y, dtype=np.float64))
    return float(grad) if np.ndim(grad) == 0 else grad


def check_scores(ds: SparseDataset, F: ScoreVector) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 1 or F.size != ds.n_samples:
        raise DimensionMismatchError(ds.n_samples, F.size, "score vector")
    return F


def total_loss(ds: SparseDataset, F: ScoreVector) -> float:
    """Sum over samples of m_i * loss(y_i, F_i)."""
    F = check_scores(ds, F)
    return float(np.dot(ds.frequencies, logistic_loss(ds.labels, F)))


def mean_loss(ds: SparseDataset, F: ScoreVector) -> float:
    """total_loss divided by the raw row count."""
    return total_loss(ds, F) / ds.n_raw


def gradient_vector(
    ds: SparseDataset,
    F: ScoreVector,
    weights: Optional[np.ndarray] = None,
) -> GradientVector:
    """
    Full gradient G with components m_i * 2(p_i - y_i).

    ``weights`` replaces m_i; callers use it for the sampled target.
    """
    F = check_scores(ds, F)
    if weights is None:
        return GradientVector(
            ds.frequencies * logistic_gradient(ds.labels, F),
            GradientFlavor.FULL,
            np.ones(ds.n_samples, dtype=bool),
        )
    weights = np.asarray(weights, dtype=np.float64)
    if weights.size != ds.n_samples:
        raise DimensionMismatchError(ds.n_samples, weights.size, "weight vector")
    return GradientVector(
        weights * logistic_gradient(ds.labels, F),
        GradientFlavor.SAMPLED,
        weights > 0,
    )
