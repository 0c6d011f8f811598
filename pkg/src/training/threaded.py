"""
Asynchronous training on real threads.

The calling thread acts as the server: it consumes pushes from a FIFO queue
and applies them one at a time. Worker threads pull the latest snapshot
(subject to the staleness gate), build a tree outside the lock, push it and
wait for the acknowledgement before pulling again.
"""

import logging
import queue
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

from core.errors import TrainingError
from boosting.tree import RegressionTree
from .config import TrainConfig
from .server import ParameterServer, StalenessGate, TargetSnapshot, TreeBuilder


logger = logging.getLogger(__name__)


@dataclass
class _Push:
    worker: int
    version: int
    tree: RegressionTree
    build_ms: float
    ack: Future = field(default_factory=Future)


@dataclass
class _WorkerExit:
    worker: int


class ThreadedRunner:
    """Server loop on the calling thread plus ``n_workers`` worker threads"""

    def __init__(self, server: ParameterServer, builder: TreeBuilder, config: TrainConfig):
        self.server = server
        self.builder = builder
        self.config = config
        self.logger = logging.getLogger(f"{__name__}.ThreadedRunner")

        self.cond = threading.Condition()
        self.gate = StalenessGate(config.staleness_limit)
        self.pushes: "queue.Queue[Union[_Push, _WorkerExit]]" = queue.Queue()
        self.stopped = False
        self.started = 0.0

    def _elapsed_ms(self) -> float:
        return (time.perf_counter() - self.started) * 1000.0

    def _pull(self, worker: int) -> Optional[TargetSnapshot]:
        with self.cond:
            while not self.stopped and not self.gate.can_admit(self.server.version):
                self.logger.debug("Worker %d waits at the staleness gate", worker)
                self.cond.wait()
            if self.stopped:
                return None
            self.gate.admit(worker, self.server.version)
            return self.server.pull()

    def _push(self, push: _Push) -> bool:
        with self.cond:
            if self.stopped:
                return False
            self.pushes.put(push)
        return push.ack.result()

    def _worker_loop(self, worker: int) -> None:
        try:
            while True:
                snapshot = self._pull(worker)
                if snapshot is None:
                    return
                began = time.perf_counter()
                tree = self.builder(worker, snapshot)
                build_ms = (time.perf_counter() - began) * 1000.0
                if not self._push(_Push(worker, snapshot.version, tree, build_ms)):
                    return
        except Exception:
            self.logger.exception("Worker %d failed; continuing without it", worker)
            with self.cond:
                self.gate.release(worker)
                self.cond.notify_all()
            self.pushes.put(_WorkerExit(worker))

    def _serve(self) -> None:
        alive = self.config.n_workers
        while not self.server.finished:
            item = self.pushes.get()
            if isinstance(item, _WorkerExit):
                alive -= 1
                if alive == 0:
                    raise TrainingError(
                        f"all workers failed after {self.server.version} of {self.config.n_trees} updates"
                    )
                continue

            try:
                with self.cond:
                    self.server.apply(
                        item.tree,
                        item.version,
                        item.worker,
                        wall_ms=self._elapsed_ms(),
                        build_time=item.build_ms,
                    )
                    self.gate.release(item.worker)
                    if self.server.finished:
                        self.stopped = True
                    self.cond.notify_all()
            except BaseException:
                # the dequeued push is no longer in the queue for _shutdown to answer
                item.ack.set_result(False)
                raise
            item.ack.set_result(not self.server.finished)

    def _shutdown(self) -> None:
        with self.cond:
            self.stopped = True
            self.cond.notify_all()
        dropped = 0
        while True:
            try:
                item = self.pushes.get_nowait()
            except queue.Empty:
                break
            if isinstance(item, _Push):
                item.ack.set_result(False)
                dropped += 1
        if dropped:
            self.logger.debug("Dropped %d in-flight tree(s) at the end of the run", dropped)

    def run(self) -> ParameterServer:
        self.started = time.perf_counter()
        if self.server.finished:
            return self.server
        with ThreadPoolExecutor(max_workers=self.config.n_workers, thread_name_prefix="worker") as pool:
            for worker in range(self.config.n_workers):
                pool.submit(self._worker_loop, worker)
            try:
                self._serve()
            finally:
                self._shutdown()
        return self.server
