"""
Deterministic asynchronous schedule in virtual time.

Workers pull a target, build for ``build_time`` units and push. The server
handles pushes one at a time in arrival order, each taking ``target_time``
units; a worker pulls again as soon as its push is applied. Completion-time
ties are broken by a per-worker priority drawn from the schedule seed, so a
run is fully determined by its seeds.
"""

import heapq
import logging
from dataclasses import dataclass, field
from typing import List, Set

import numpy as np

from core.errors import TrainingError
from .config import TrainConfig
from .server import ParameterServer, StalenessGate, TargetSnapshot, TreeBuilder


logger = logging.getLogger(__name__)


@dataclass(order=True)
class _Completion:
    time: float
    priority: int
    worker: int
    snapshot: TargetSnapshot = field(compare=False)
    build_time: float = field(compare=False)


class VirtualScheduler:
    """Single-threaded event loop driving a ParameterServer"""

    def __init__(self, server: ParameterServer, builder: TreeBuilder, config: TrainConfig):
        self.server = server
        self.builder = builder
        self.config = config
        self.logger = logging.getLogger(f"{__name__}.VirtualScheduler")

        self.rng = np.random.default_rng(config.schedule_seed)
        self.priority = self.rng.permutation(config.n_workers)
        self.gate = StalenessGate(config.staleness_limit)
        self.events: List[_Completion] = []
        self.waiting: Set[int] = set(range(config.n_workers))
        self.alive: Set[int] = set(range(config.n_workers))
        self.server_free = 0.0

    def _build_duration(self) -> float:
        if self.config.build_jitter == 0.0:
            return self.config.build_time
        return self.config.build_time * (1.0 + self.config.build_jitter * self.rng.random())

    def _admit_waiting(self, now: float) -> None:
        for worker in sorted(self.waiting):
            if not self.gate.can_admit(self.server.version):
                self.logger.debug("Staleness gate holds %d worker(s) at t=%.3f", len(self.waiting), now)
                return
            self.gate.admit(worker, self.server.version)
            self.waiting.discard(worker)
            duration = self._build_duration()
            heapq.heappush(
                self.events,
                _Completion(now + duration, int(self.priority[worker]), worker, self.server.pull(), duration),
            )

    def run(self) -> ParameterServer:
        self._admit_waiting(0.0)
        while not self.server.finished:
            if not self.events:
                raise TrainingError(
                    f"all workers failed after {self.server.version} of {self.config.n_trees} updates"
                )
            event = heapq.heappop(self.events)

            try:
                tree = self.builder(event.worker, event.snapshot)
            except Exception:
                self.logger.exception("Worker %d failed; continuing without it", event.worker)
                self.gate.release(event.worker)
                self.alive.discard(event.worker)
                self._admit_waiting(event.time)
                continue

            start = max(event.time, self.server_free)
            finish = start + self.config.target_time
            self.server_free = finish
            self.server.apply(
                tree,
                event.snapshot.version,
                event.worker,
                wall_ms=finish,
                build_time=event.build_time,
                server_time=self.config.target_time,
            )
            self.gate.release(event.worker)
            if self.server.finished:
                break
            self.waiting.add(event.worker)
            self._admit_waiting(finish)

        dropped = len(self.events)
        if dropped:
            self.logger.debug("Dropping %d in-flight build(s) at the end of the run", dropped)
        return self.server
