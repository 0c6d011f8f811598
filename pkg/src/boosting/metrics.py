"""
Held-out evaluation of a forest.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np
from sklearn.metrics import roc_auc_score

from dataset.models import SparseDataset
from .forest import Forest, score_vector
from .loss import check_scores, mean_loss


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Metrics:
    loss: float
    accuracy: float
    auc: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def evaluate_scores(ds: SparseDataset, F: np.ndarray) -> Metrics:
    """
    Metrics of a score vector, weighting each sample by its frequency.

    Accuracy predicts 1 when p > 0.5 (F > 0). AUC is NaN when only one class
    is present.
    """
    F = check_scores(ds, F)
    weights = ds.frequencies.astype(np.float64)
    predictions = (F > 0.0).astype(np.int8)
    accuracy = float(np.dot(weights, predictions == ds.labels) / weights.sum())

    if np.unique(ds.labels).size < 2:
        auc = math.nan
    else:
        auc = float(roc_auc_score(ds.labels, F, sample_weight=weights))

    return Metrics(loss=mean_loss(ds, F), accuracy=accuracy, auc=auc)


def evaluate(forest: Forest, ds: SparseDataset) -> Metrics:
    """Loss per raw row, accuracy and AUC of ``forest`` on ``ds``."""
    return evaluate_scores(ds, score_vector(forest, ds))
