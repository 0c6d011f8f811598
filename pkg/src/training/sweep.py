"""
Updates-to-threshold experiments over worker counts or sampling rates.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd

from core.errors import ConfigurationError
from dataset.binning import build_bins
from dataset.models import SparseDataset
from .config import TrainConfig
from .history import History
from .trainer import train_async


logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["axis", "value", "updates_to_threshold", "final_loss", "saturated"]


class SweepAxis(str, Enum):
    WORKERS = "workers"
    RATE = "rate"


@dataclass(frozen=True)
class SweepCell:
    axis: SweepAxis
    value: float
    updates_to_threshold: int
    final_loss: float
    saturated: bool
    history: History

    def summary_row(self) -> list:
        value = int(self.value) if self.axis is SweepAxis.WORKERS else self.value
        return [self.axis.value, value, self.updates_to_threshold, self.final_loss, self.saturated]


def cell_config(base: TrainConfig, axis: SweepAxis, value: float) -> TrainConfig:
    if axis is SweepAxis.WORKERS:
        if value != int(value):
            raise ConfigurationError(f"worker count must be an integer, got {value}")
        return replace(base, n_workers=int(value))
    return replace(base, rate=float(value))


def run_sweep(
    train: SparseDataset,
    base: TrainConfig,
    axis: Union[SweepAxis, str],
    values: Sequence[float],
    threshold: float,
    test: Optional[SparseDataset] = None,
    output_dir: Optional[Union[str, Path]] = None,
) -> List[SweepCell]:
    """
    Train one run per value and record when train loss first reaches ``threshold``.

    A run that never reaches it is marked saturated with
    ``updates_to_threshold = n_trees + 1``. When ``output_dir`` is given, each
    cell's history and the summary are written there as CSV.
    """
    axis = SweepAxis(axis)
    if not values:
        raise ConfigurationError("a sweep needs at least one value")
    if not math.isfinite(threshold):
        raise ConfigurationError("a sweep needs a finite loss threshold")

    bins = build_bins(train, base.max_bins)
    cells: List[SweepCell] = []
    for value in values:
        config = cell_config(base, axis, value)
        _, history = train_async(train, config, test=test, bins=bins)
        reached = history.updates_to_threshold(threshold)
        cell = SweepCell(
            axis=axis,
            value=value,
            updates_to_threshold=reached,
            final_loss=history.final_train_loss(),
            saturated=reached > config.n_trees,
            history=history,
        )
        cells.append(cell)
        logger.info(
            "Sweep %s=%s: updates_to_threshold=%d%s",
            axis.value, value, reached, " (saturated)" if cell.saturated else "",
        )
        if output_dir is not None:
            history.to_csv(Path(output_dir) / f"history_{axis.value}_{cell.summary_row()[1]}.csv")

    if output_dir is not None:
        write_summary(cells, Path(output_dir) / "summary.csv")
    return cells


def summary_frame(cells: Sequence[SweepCell]) -> pd.DataFrame:
    return pd.DataFrame([cell.summary_row() for cell in cells], columns=SUMMARY_COLUMNS)


def write_summary(cells: Sequence[SweepCell], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summary_frame(cells).to_csv(path, index=False)
    return path


def slowdown(cells: Sequence[SweepCell], value: float, baseline: float = 1) -> float:
    """updates_to_threshold at ``value`` divided by that at ``baseline``."""
    by_value = {cell.value: cell.updates_to_threshold for cell in cells}
    if value not in by_value or baseline not in by_value:
        raise ConfigurationError(f"sweep has no cell for {value} or {baseline}")
    if by_value[baseline] == 0:
        return math.nan
    return by_value[value] / by_value[baseline]
