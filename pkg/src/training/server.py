"""
Parameter-server state shared by every training mode.

The server owns the forest, the current training scores and the published
target snapshot. Workers only see immutable ``TargetSnapshot`` objects and
hand back immutable trees; each received tree is one linearized update.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
import scipy.sparse as sp

from core.errors import DimensionMismatchError, TrainingError
from boosting.forest import Forest, init_forest
from boosting.loss import GradientVector, gradient_vector, mean_loss
from boosting.sampler import SampleDraw, SamplingPlan, draw, weighted_target
from boosting.tree import RegressionTree, TreeParams, apply, fit, predict_binned
from dataset.models import FeatureBins, SparseDataset
from .config import TrainConfig
from .history import History, UpdateRecord


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TargetSnapshot:
    """
    Published target at server version ``version``.

    The target was computed on the scores after ``version`` updates, using
    draw index ``version`` (None when sampling keeps every row).
    """
    version: int
    target: GradientVector
    weights: np.ndarray
    sample_draw: Optional[SampleDraw] = None

    @property
    def draw_index(self) -> int:
        return self.version


# (worker id, snapshot) -> tree fit to that snapshot
TreeBuilder = Callable[[int, TargetSnapshot], RegressionTree]


def build_tree(bins: FeatureBins, snapshot: TargetSnapshot, params: TreeParams) -> RegressionTree:
    """Fit the descent direction: the tree approximates minus the target."""
    return fit(
        bins,
        -snapshot.target.values,
        snapshot.weights,
        params,
        draw_index=snapshot.draw_index,
        included=snapshot.target.included,
    )


def default_builder(bins: FeatureBins, params: TreeParams) -> TreeBuilder:
    def builder(worker: int, snapshot: TargetSnapshot) -> RegressionTree:
        return build_tree(bins, snapshot, params)
    return builder


class ParameterServer:
    """
    Canonical model state and the update rule.

    Not thread-safe by itself; the threaded runner serializes access.
    """

    def __init__(
        self,
        train: SparseDataset,
        bins: FeatureBins,
        config: TrainConfig,
        plan: Optional[SamplingPlan] = None,
        test: Optional[SparseDataset] = None,
    ):
        self.train = train
        self.bins = bins
        self.config = config
        self.plan = plan if plan is not None else SamplingPlan.uniform(config.rate, train)
        self.plan.check(train)
        self.test = test
        self._test_X = _aligned(test, train.n_features) if test is not None else None
        self.logger = logging.getLogger(f"{__name__}.ParameterServer")

        self.forest: Forest = init_forest(train)
        self.version = 0
        self.scores = np.full(train.n_samples, self.forest.f0, dtype=np.float64)
        self.test_scores = (
            np.full(test.n_samples, self.forest.f0, dtype=np.float64) if test is not None else None
        )
        self.history = History(initial_train_loss=mean_loss(train, self.scores))
        self.snapshot = self._publish(0)

    @property
    def finished(self) -> bool:
        return self.version >= self.config.n_trees

    def pull(self) -> TargetSnapshot:
        """Latest published target."""
        return self.snapshot

    def _publish(self, version: int) -> TargetSnapshot:
        if self.plan.is_full:
            target = gradient_vector(self.train, self.scores)
            weights = self.train.frequencies.astype(np.float64)
            sample_draw = None
        else:
            sample_draw = draw(self.plan, self.train, self.config.sample_seed, version)
            target = weighted_target(sample_draw, self.train, self.scores)
            weights = sample_draw.weights
        return TargetSnapshot(version, target, weights, sample_draw)

    def apply(
        self,
        tree: RegressionTree,
        pulled_version: int,
        worker: int,
        wall_ms: float,
        build_time: float = math.nan,
        server_time: float = math.nan,
    ) -> UpdateRecord:
        """
        Append a received tree, refresh scores, publish the next target.

        Returns the history record of the update. When ``server_time`` is not
        given, the measured duration of the update in milliseconds is recorded.
        """
        started = time.perf_counter()
        if self.finished:
            raise TrainingError("server already applied every requested update")
        if pulled_version > self.version:
            raise TrainingError(f"tree built on future version {pulled_version}")

        step = self.config.step
        staleness = self.version - pulled_version
        self.forest = self.forest.with_tree(tree, step)
        self.scores += step * predict_binned(tree, self.bins)
        if self.test is not None:
            self.test_scores += step * tree.value[apply(tree, self._test_X)]
        self.version += 1

        train_loss = mean_loss(self.train, self.scores)
        if self.test is not None:
            test_loss = mean_loss(self.test, self.test_scores)
            accuracy = _accuracy(self.test, self.test_scores)
        else:
            test_loss = math.nan
            accuracy = _accuracy(self.train, self.scores)

        if not self.finished:
            self.snapshot = self._publish(self.version)
        if math.isnan(server_time):
            server_time = (time.perf_counter() - started) * 1000.0

        record = UpdateRecord(
            update=self.version,
            worker=worker,
            staleness=staleness,
            train_loss=train_loss,
            test_loss=test_loss,
            accuracy=accuracy,
            wall_ms=wall_ms,
            build_time=build_time,
            server_time=server_time,
        )
        self.history.append(record)

        self.logger.debug(
            "Update %d from worker %d (staleness %d, train_loss %.6f)",
            self.version, worker, staleness, train_loss,
        )
        every = self.config.progress_every
        if every and self.version % every == 0:
            self.logger.info(
                "Applied %d/%d updates, train_loss=%.6f",
                self.version, self.config.n_trees, train_loss,
            )
        return record


def _aligned(test: SparseDataset, width: int) -> sp.csr_matrix:
    X = test.features
    if X.shape[1] > width:
        raise DimensionMismatchError(width, X.shape[1], "test feature dimension")
    if X.shape[1] < width:
        X = sp.csr_matrix((X.data, X.indices, X.indptr), shape=(X.shape[0], width))
    return X


def _accuracy(ds: SparseDataset, F: np.ndarray) -> float:
    return float(np.dot(ds.frequencies, (F > 0.0) == ds.labels) / ds.n_raw)


class StalenessGate:
    """
    Admission control for pulls.

    A pull at server version ``current`` is admitted only if, for every build
    in flight (the new one included), updates already applied since its pull
    plus the number of other builds in flight stays within the limit. Every
    applied tree therefore has staleness <= limit.
    """

    def __init__(self, limit: Optional[int]):
        self.limit = limit
        self.outstanding: Dict[int, int] = {}
        self.logger = logging.getLogger(f"{__name__}.StalenessGate")

    def can_admit(self, current: int) -> bool:
        if self.limit is None:
            return True
        others = len(self.outstanding)
        if others > self.limit:
            return False
        return all(current - version + others <= self.limit for version in self.outstanding.values())

    def admit(self, worker: int, current: int) -> None:
        if worker in self.outstanding:
            raise TrainingError(f"worker {worker} already has a build in flight")
        self.outstanding[worker] = current

    def release(self, worker: int) -> None:
        self.outstanding.pop(worker, None)

    def in_flight(self) -> int:
        return len(self.outstanding)
