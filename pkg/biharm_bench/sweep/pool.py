import logging
from threading import Thread
from typing import Callable, List, Sequence

import numpy as np

from biharm_bench.errors import PointEvaluationError
from biharm_bench.sweep.buffer import RecordBuffer

logger = logging.getLogger(__name__)

# (grid index, chart point) -> record
PointEvaluator = Callable[[int, np.ndarray], object]


class SweepWorker:
    def __init__(
        self,
        evaluate: PointEvaluator,
        points: np.ndarray,
        buffer: RecordBuffer,
        worker_id: int,
        num_workers: int,
    ) -> None:
        """
        Evaluates the grid points with index = worker_id (mod num_workers)
        and pushes (index, record) into the shared buffer. Failures are pushed
        as PointEvaluationError so the collector never waits forever.
        """
        self.evaluate = evaluate
        self.points = points
        self.buffer = buffer
        self.worker_id = worker_id
        self.num_workers = num_workers
        self.thread = None
        self.is_running = False

    def indices(self) -> range:
        return range(self.worker_id, len(self.points), self.num_workers)

    def run(self):
        def run_impl():
            for index in self.indices():
                if not self.is_running:
                    break
                point = self.points[index]
                try:
                    record = self.evaluate(index, point)
                except Exception as e:
                    logger.error("Worker %d failed at point %s: %s", self.worker_id, tuple(point), e)
                    record = PointEvaluationError(point, e)
                self.buffer.add((index, record))
            logger.debug("Worker %d finished.", self.worker_id)

        # Initialize thread once only
        if self.thread is None:
            self.is_running = True
            self.thread = Thread(target=run_impl, daemon=True)
            self.thread.start()
        else:
            raise RuntimeError("Sweep worker already running!")

    def stop(self):
        """
        Stop after the current point and wait for the thread.
        """
        if self.thread is not None:
            self.is_running = False
            self.thread.join()
            self.thread = None


class GridSweep:
    """
    Fan a grid out over worker threads and collect the records in grid order.
    """

    def __init__(self, evaluate: PointEvaluator, points: Sequence, num_workers: int = 1) -> None:
        assert num_workers >= 1, "Need at least one worker."
        self.evaluate = evaluate
        self.points = np.asarray(points, dtype=float)
        self.num_workers = num_workers
        self.buffer = RecordBuffer(n=len(self.points))
        self.workers: List[SweepWorker] = []

    def run(self) -> List[object]:
        """
        Returns:
            list: one record per grid point, in grid order.

        Raises:
            PointEvaluationError: the first failed point in grid order.
        """
        if self.workers:
            raise RuntimeError("Grid sweep already running!")
        workers = min(self.num_workers, max(1, len(self.points)))
        logger.info("Sweeping %d points with %d workers.", len(self.points), workers)
        self.workers = [
            SweepWorker(self.evaluate, self.points, self.buffer, worker_id, workers)
            for worker_id in range(workers)
        ]
        for worker in self.workers:
            worker.run()
        try:
            items = self.buffer.get_ordered()
        finally:
            for worker in self.workers:
                worker.stop()
            self.workers = []

        records = [record for _, record in items]
        for record in records:
            if isinstance(record, PointEvaluationError):
                raise record
        return records
