"""
Public training loops.

``train_serial`` is plain (or stochastic, when the rate is below 1) gradient
boosting. ``train_async`` runs the same server update rule with several
workers, either on the virtual scheduler or on real threads.
"""

import logging
import time
from typing import Optional, Tuple

from core.errors import ConfigurationError
from boosting.forest import Forest
from boosting.sampler import SamplingPlan
from dataset.binning import build_bins
from dataset.models import FeatureBins, SparseDataset
from .config import TrainConfig, TrainMode
from .history import History
from .server import ParameterServer, TreeBuilder, default_builder
from .threaded import ThreadedRunner
from .virtual import VirtualScheduler


logger = logging.getLogger(__name__)


def _server(
    train: SparseDataset,
    config: TrainConfig,
    test: Optional[SparseDataset],
    plan: Optional[SamplingPlan],
    bins: Optional[FeatureBins],
) -> ParameterServer:
    if bins is None:
        bins = build_bins(train, config.max_bins)
    return ParameterServer(train, bins, config, plan=plan, test=test)


def train_serial(
    train: SparseDataset,
    config: TrainConfig,
    test: Optional[SparseDataset] = None,
    plan: Optional[SamplingPlan] = None,
    builder: Optional[TreeBuilder] = None,
    bins: Optional[FeatureBins] = None,
) -> Tuple[Forest, History]:
    """
    Fit ``n_trees`` trees one after another, each on the target of the
    current scores (sampled with draw index j - 1 for tree j).
    """
    if config.n_workers != 1:
        raise ConfigurationError("serial training runs exactly one worker")

    server = _server(train, config, test, plan, bins)
    builder = builder or default_builder(server.bins, config.tree)
    logger.info("Serial training: %d trees, step=%s, rate=%s", config.n_trees, config.step, config.rate)

    started = time.perf_counter()
    while not server.finished:
        snapshot = server.pull()
        began = time.perf_counter()
        tree = builder(0, snapshot)
        build_ms = (time.perf_counter() - began) * 1000.0
        server.apply(
            tree,
            snapshot.version,
            worker=0,
            wall_ms=(time.perf_counter() - started) * 1000.0,
            build_time=build_ms,
        )

    logger.info("Serial training done: train_loss=%.6f", server.history.final_train_loss())
    return server.forest, server.history


def train_async(
    train: SparseDataset,
    config: TrainConfig,
    test: Optional[SparseDataset] = None,
    plan: Optional[SamplingPlan] = None,
    builder: Optional[TreeBuilder] = None,
    bins: Optional[FeatureBins] = None,
) -> Tuple[Forest, History]:
    """
    Train with ``n_workers`` asynchronous workers and a single server.

    Exactly ``n_trees`` trees are applied whatever the mode or worker count.
    A worker whose build raises is dropped and the run continues with the
    others; ``TrainingError`` is raised only when every worker has failed.

    Args:
        builder: Optional replacement for the tree builder, called as
            ``builder(worker_id, snapshot)``
    """
    if config.mode is TrainMode.SERIAL:
        return train_serial(train, config, test=test, plan=plan, builder=builder, bins=bins)

    server = _server(train, config, test, plan, bins)
    builder = builder or default_builder(server.bins, config.tree)
    logger.info(
        "Asynchronous training: %d trees, %d workers, mode=%s, staleness limit=%s",
        config.n_trees, config.n_workers, config.mode.value, config.staleness_limit,
    )

    if config.mode is TrainMode.VIRTUAL:
        VirtualScheduler(server, builder, config).run()
    else:
        ThreadedRunner(server, builder, config).run()

    history = server.history
    logger.info(
        "Asynchronous training done: train_loss=%.6f, max staleness=%d",
        history.final_train_loss(), history.max_staleness(),
    )
    return server.forest, history
