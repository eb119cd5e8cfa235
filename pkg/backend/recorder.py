from threading import Lock
from typing import Optional

from backend.trace import CycleRecord
from common.variants import StepKind


class TraceRecorder:
    def __init__(self) -> None:
        """Recorder for tracking the per-cycle quantities of a solver run and the flops spent so far."""
        self.records: list[CycleRecord] = []
        self.cum_flops: int = 0
        self.__lock: Lock = Lock()

    def get_records(self) -> list[CycleRecord]:
        """Get a copy of all recorded cycles."""
        with self.__lock:
            return self.records.copy()

    def __len__(self) -> int:
        return len(self.records)

    def record_cycle(self, *, error: Optional[float], rho: float, flops: int, kind: StepKind,
                     **kwargs) -> CycleRecord:
        """
        Record a completed cycle, numbering it and accumulating its flops.
        The remaining keyword arguments are passed to the CycleRecord constructor.
        :param error: ‖x_k - x*‖ of the iterate the cycle started from, when known.
        :param rho: Squared internal residual of the cycle.
        :param flops: Floating point operations spent in the cycle.
        :param kind: What the cycle did to the iterate.
        :return: The stored CycleRecord.
        """
        with self.__lock:
            self.cum_flops += flops
            record: CycleRecord = CycleRecord(cycle=len(self.records), error=error, rho=rho, flops=flops,
                                              cum_flops=self.cum_flops, kind=kind, **kwargs)
            self.records.append(record)
            return record
