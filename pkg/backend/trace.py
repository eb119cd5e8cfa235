"""
Per-cycle records of a solver run and their CSV serialisation.
CSV output is locale independent: floats are written with their shortest round-trip repr and LF line endings.
"""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from common.types import CsvRow, Ell, Vector
from common.variants import StepKind, TerminalStatus, Variant

TRACE_COLUMNS: list[str] = ["cycle", "error", "rho", "delta", "gamma", "s_under", "predicted_gain", "cum_flops"]
COMPARE_COLUMNS: list[str] = ["variant", "ell", "cycle", "error", "cum_flops"]


@dataclass(kw_only=True, frozen=True)
class CycleRecord:
    """
    Quantities of cycle k.
    :param cycle: The cycle index k.
    :param error: ‖x_k - x*‖ for the iterate the cycle started from, when x* is known.
    :param rho: Squared internal residual ρ_k of the cycle.
    :param delta: Squared Kaczmarz step length δ_k, 0.0 for rejected epochs.
    :param gamma: Scale γ_k of accelerated cycles.
    :param s_under: Coefficient s̲_k on the Kaczmarz step of accelerated cycles.
    :param predicted_gain: Predicted decrease of the squared error achieved by the cycle.
    :param flops: Floating point operations spent in the cycle.
    :param cum_flops: Floating point operations spent up to and including the cycle.
    :param kind: What the cycle did to the iterate.
    :param window_columns: Number of window directions the step searched besides d.
    """
    cycle: int
    error: Optional[float]
    rho: float
    delta: float
    gamma: Optional[float] = None
    s_under: Optional[float] = None
    predicted_gain: Optional[float] = None
    flops: int
    cum_flops: int
    kind: StepKind
    window_columns: int = 0

    def to_row(self) -> CsvRow:
        return {
            "cycle": self.cycle,
            "error": self.error,
            "rho": self.rho,
            "delta": self.delta,
            "gamma": self.gamma,
            "s_under": self.s_under,
            "predicted_gain": self.predicted_gain,
            "cum_flops": self.cum_flops
        }


@dataclass
class IterationTrace:
    """
    Complete record of one solver run.
    :param variant: The variant that produced the trace.
    :param ell: The window capacity of windowed variants, None otherwise or when unbounded.
    :param records: One record per cycle, rejected epochs and the terminal detection cycle included.
    :param status: How the run ended.
    :param breakdown_resets: Number of times the search window was reset after a numerical breakdown.
    :param final_x: The iterate the run returned.
    :param final_error: ‖final_x - x*‖ when the solution is known.
    """
    variant: Variant
    ell: Ell
    records: list[CycleRecord] = field(default_factory=list)
    status: TerminalStatus = TerminalStatus.MAX_CYCLES
    breakdown_resets: int = 0
    final_x: Optional[Vector] = None
    final_error: Optional[float] = None

    @property
    def errors(self) -> list[Optional[float]]:
        return [record.error for record in self.records]

    @property
    def total_flops(self) -> int:
        return self.records[-1].cum_flops if self.records else 0

    def accepted_errors(self) -> Vector:
        """Errors at the start of every cycle that was not a rejected epoch, as an array."""
        return np.array([record.error for record in self.records if record.kind is not StepKind.REJECTED],
                        dtype=np.float64)

    def label(self) -> str:
        if not self.variant.is_windowed:
            return str(self.variant)
        return f"{self.variant}(ell={'all' if self.ell is None else self.ell})"


def _write_rows(path: str | Path, columns: list[str], rows: Iterable[CsvRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer: csv.DictWriter = csv.DictWriter(file, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_trace_csv(trace: IterationTrace, path: str | Path) -> None:
    """Write one row per recorded cycle with the columns of TRACE_COLUMNS."""
    _write_rows(path, TRACE_COLUMNS, (record.to_row() for record in trace.records))


def compare_rows(traces: Iterable[IterationTrace]) -> list[CsvRow]:
    """Flatten several traces into the long format of COMPARE_COLUMNS, keeping the input order."""
    rows: list[CsvRow] = []
    for trace in traces:
        ell: str = "" if not trace.variant.is_windowed else ("all" if trace.ell is None else str(trace.ell))
        rows.extend({"variant": str(trace.variant), "ell": ell, "cycle": record.cycle, "error": record.error,
                     "cum_flops": record.cum_flops} for record in trace.records)
    return rows


def write_compare_csv(traces: Iterable[IterationTrace], path: str | Path) -> None:
    _write_rows(path, COMPARE_COLUMNS, compare_rows(traces))
