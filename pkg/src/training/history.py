"""
Per-update training history.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Union

import numpy as np
import pandas as pd

from core.errors import TrainingError


logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["update", "worker", "staleness", "train_loss", "test_loss", "accuracy", "wall_ms"]


@dataclass(frozen=True)
class UpdateRecord:
    """
    One server update.

    ``staleness`` is the number of updates applied between the worker's pull
    and this update. ``accuracy`` is measured on the test set when there is
    one, otherwise on the training set. ``build_time`` and ``server_time`` are
    in the same unit as ``wall_ms`` and are not written to CSV.
    """
    update: int
    worker: int
    staleness: int
    train_loss: float
    test_loss: float
    accuracy: float
    wall_ms: float
    build_time: float = math.nan
    server_time: float = math.nan


class History:
    """Ordered update records of one run"""

    def __init__(self, initial_train_loss: float = math.nan):
        self.initial_train_loss = initial_train_loss
        self.records: List[UpdateRecord] = []

    def append(self, record: UpdateRecord) -> None:
        expected = len(self.records) + 1
        if record.update != expected:
            raise TrainingError(f"update {record.update} recorded out of order (expected {expected})")
        if record.staleness < 0:
            raise TrainingError(f"negative staleness at update {record.update}")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[UpdateRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> UpdateRecord:
        return self.records[index]

    @property
    def train_losses(self) -> np.ndarray:
        return np.array([r.train_loss for r in self.records])

    @property
    def staleness(self) -> np.ndarray:
        return np.array([r.staleness for r in self.records], dtype=np.int64)

    def max_staleness(self) -> int:
        return int(self.staleness.max()) if self.records else 0

    def final_train_loss(self) -> float:
        return self.records[-1].train_loss if self.records else self.initial_train_loss

    def updates_to_threshold(self, threshold: float) -> int:
        """
        First update index whose train loss is <= ``threshold``.

        0 if the initial model already qualifies; ``len(self) + 1`` if no
        update does (saturated).
        """
        if self.initial_train_loss <= threshold:
            return 0
        for record in self.records:
            if record.train_loss <= threshold:
                return record.update
        return len(self.records) + 1

    def throughput(self) -> float:
        """Updates per unit of ``wall_ms`` over the whole run."""
        if not self.records or self.records[-1].wall_ms <= 0:
            return math.nan
        return len(self.records) / self.records[-1].wall_ms

    def mean_build_time(self) -> float:
        values = [r.build_time for r in self.records if not math.isnan(r.build_time)]
        return float(np.mean(values)) if values else math.nan

    def mean_server_time(self) -> float:
        values = [r.server_time for r in self.records if not math.isnan(r.server_time)]
        return float(np.mean(values)) if values else math.nan

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [[getattr(r, column) for column in HISTORY_COLUMNS] for r in self.records],
            columns=HISTORY_COLUMNS,
        )

    def to_csv(self, path: Optional[Union[str, Path]] = None) -> Optional[str]:
        """Write the history CSV; returns the text when no path is given."""
        if path is None:
            return self.to_frame().to_csv(index=False)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        logger.debug("Wrote %d history rows to %s", len(self), path)
        return None
