"""
Flop accounting for the solver loops.
Counting conventions: a multiply-add is 2 flops, cached row norms are not recounted.
"""
from dataclasses import dataclass
from typing import Optional

from common.functions import oncost
from common.types import FlopReport, IterationTrace
from common.variants import StepKind, Variant


class FlopCounter:
    def __init__(self) -> None:
        """Mutable flop tally shared by the kernels and acceleration steps of one cycle."""
        self.count: int = 0

    def add(self, flops: int) -> None:
        self.count += int(flops)

    def take(self) -> int:
        """Return the tally and restart from zero."""
        flops, self.count = self.count, 0
        return flops


def charge(counter: Optional[FlopCounter], flops: int) -> None:
    if counter is not None:
        counter.add(flops)


def dense_solve_flops(size: int) -> int:
    """LU factorisation plus forward and backward substitution, as costed for the naive affine step."""
    return (4 * size ** 3 + 21 * size ** 2 + 5 * size) // 6


@dataclass(frozen=True)
class CostModel:
    """
    Per-cycle flop formulas of the solver variants for a matrix with m rows, n columns and nnz entries.
    Formulas taking ℓ describe a cycle whose window spans ℓ iterates.
    """
    n_rows: int
    n_cols: int
    nnz: int

    @classmethod
    def of(cls, matrix) -> "CostModel":
        return cls(matrix.n_rows, matrix.n_cols, matrix.nnz)

    def plain(self) -> int:
        return 4 * self.nnz + self.n_rows

    def line_search(self) -> int:
        return 4 * self.nnz + 3 * self.n_rows + 5 * self.n_cols

    def fast_affine(self, ell: int) -> int:
        return 4 * self.nnz + (3 + 5 * ell) * self.n_cols + 3 * self.n_rows + 5 * ell

    def naive_affine(self, ell: int) -> float:
        return 4 * self.nnz + (3 + 3 * ell + 0.5 * ell ** 2) * self.n_cols + 3 * self.n_rows + ell ** 3

    def oncost(self, ell: int) -> float:
        return oncost(ell, self.n_rows, self.n_cols, self.nnz)


def flop_check(trace: IterationTrace, cfg, matrix) -> FlopReport:
    """
    Compare the instrumented per-cycle flop counts of a trace against the cost model of its variant.
    Plain and line-search cycles are expected to match exactly; affine cycles only roughly.
    Rejected epochs and the terminal detection cycle are not checked.
    :param trace: A completed IterationTrace.
    :param cfg: The SolverConfig the trace was produced with.
    :param matrix: The system matrix the trace was produced on.
    :return: A FlopReport with the number of checked cycles and the maximum deviations.
    """
    model: CostModel = CostModel.of(matrix)
    naive: bool = cfg.variant is Variant.K_AFF_NAIVE
    max_abs: float = 0.0
    max_rel: float = 0.0
    checked: int = 0
    exact: bool = True
    for record in trace.records:
        if record.kind is StepKind.PLAIN:
            expected: float = model.plain()
        elif record.kind is StepKind.LINE_SEARCH:
            expected = model.line_search()
        elif record.kind is StepKind.AFFINE:
            ell_eff: int = record.window_columns + 1
            expected = model.naive_affine(ell_eff) if naive else model.fast_affine(ell_eff)
            exact = False
        else:
            continue
        if cfg.variant.is_randomized:
            exact = False
        deviation: float = abs(record.flops - expected)
        max_abs = max(max_abs, deviation)
        max_rel = max(max_rel, deviation / expected)
        checked += 1
    return {
        "checked_cycles": checked,
        "max_abs_deviation": max_abs,
        "max_rel_deviation": max_rel,
        "exact": exact and max_abs == 0.0
    }
