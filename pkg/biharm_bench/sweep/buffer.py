from threading import Condition, Lock
from typing import List

from biharm_bench.types import IndexedRecord


class RecordBuffer:
    def __init__(self, n: int) -> None:
        """
        Thread safe buffer that sweep workers push indexed records into. The
        collector blocks until n records have arrived.

        Args:
            n (int): number of records that make the buffer full.
        """
        assert n is not None and n >= 0, "Buffer length must be non-negative."

        self.n = n
        self.records: List[IndexedRecord] = []

        self.mutex = Lock()
        self.full_cv = Condition(self.mutex)

    def add(self, item: IndexedRecord):
        """
        Add a record, signalling the collector once the buffer is full.

        Args:
            item: (grid index, record) pair.
        """
        with self.mutex:
            self.records.append(item)
            if len(self.records) >= self.n:
                self.full_cv.notify_all()

    def get_items(self) -> List[IndexedRecord]:
        """
        Block until n records arrived, then drain them in arrival order.
        Records beyond the first n stay buffered.
        """
        with self.mutex:
            self.full_cv.wait_for(lambda: len(self.records) >= self.n)
            drained, self.records = self.records[: self.n], self.records[self.n :]
            return drained

    def __len__(self) -> int:
        with self.mutex:
            return len(self.records)

    def get_ordered(self) -> List[IndexedRecord]:
        """
        Drain like get_items, then sort by grid index so the result does not
        depend on which worker finished first.
        """
        items = self.get_items()
        indices = [index for index, _ in items]
        assert len(set(indices)) == len(indices), "Duplicate grid index in buffer."
        return sorted(items, key=lambda item: item[0])
