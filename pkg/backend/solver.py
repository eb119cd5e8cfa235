"""
Top-level iteration loops of the Kaczmarz family.
Deterministic variants sweep the rows in a fixed (optionally shuffled) order and stop once the Kaczmarz step
becomes negligible; randomized variants draw one epoch per cycle and only accept epochs that move the iterate.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from backend.accel_search import affine_step_fast, affine_step_naive, line_search_step
from backend.cost_model import FlopCounter
from backend.kaczmarz_kernel import EpochPlan, SweepOutcome, iter_epoch_plans, sweep_cycle, sweep_epoch_random
from backend.recorder import TraceRecorder
from backend.search_window import SearchWindow
from backend.solver_config import SolverConfig
from backend.sparse_matrix import SparseRowMatrix
from backend.trace import IterationTrace
from common.errors import BreakdownError, IterateSolved
from common.functions import gamma, plain_cycle_gain, stopping_threshold
from common.types import IndexArray, Vector
from common.variants import StepKind, TerminalStatus, Variant

LOG: logging.Logger = logging.getLogger(__name__)

PROGRESS_TOLERANCE: float = 1e-15


@dataclass(kw_only=True, frozen=True)
class GuardedEpoch:
    """
    Result of drawing random epochs until one moves the iterate.
    :param accepted: The first epoch that made progress, or None when none did.
    :param rejected: The no-progress epochs drawn before it, in order.
    :param cap_reached: Whether drawing stopped at the consecutive no-progress cap.
    """
    accepted: Optional[SweepOutcome]
    rejected: list[SweepOutcome] = field(default_factory=list)
    cap_reached: bool = False


def run_random_epoch_guarded(matrix: SparseRowMatrix, b: Vector, x: Vector, plans: Iterator[EpochPlan],
                             max_no_progress: int = 100, max_epochs: Optional[int] = None) -> GuardedEpoch:
    """
    Draw random epochs from x until the endpoint differs from x.
    An epoch that only visits rows x already satisfies leaves x in place and carries no search direction.
    :param matrix: The system matrix (A).
    :param b: Right-hand side of length m.
    :param x: The current iterate x_k.
    :param plans: Source of epoch plans, consumed one per drawn epoch.
    :param max_no_progress: Consecutive no-progress epochs after which drawing stops with the cap flag set.
    :param max_epochs: Optional budget of epochs that may be drawn in total.
    :return: The GuardedEpoch.
    """
    scale: float = max(1.0, float(np.linalg.norm(x)))
    rejected: list[SweepOutcome] = []
    while True:
        if len(rejected) >= max_no_progress:
            return GuardedEpoch(accepted=None, rejected=rejected, cap_reached=True)
        if max_epochs is not None and len(rejected) >= max_epochs:
            return GuardedEpoch(accepted=None, rejected=rejected)
        plan: EpochPlan = next(plans)
        outcome: SweepOutcome = sweep_epoch_random(matrix, b, x, plan)
        if np.linalg.norm(outcome.endpoint - x) > PROGRESS_TOLERANCE * scale:
            return GuardedEpoch(accepted=outcome, rejected=rejected)
        LOG.debug(f"Epoch {plan.epoch} made no progress and was rejected.")
        rejected.append(outcome)


class KaczmarzSolver:
    def __init__(self, matrix: SparseRowMatrix, b: Vector, cfg: SolverConfig,
                 x_star: Optional[Vector] = None) -> None:
        """
        Solver for a consistent system Ax = b with one of the Kaczmarz variants.
        The row shuffle is applied here so the same matrix can serve several solvers.
        :param matrix: The system matrix (A).
        :param b: Right-hand side of length m, assumed to lie in the range of A.
        :param cfg: The SolverConfig of the run.
        :param x_star: Optional known solution, only used to record errors.
        """
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (matrix.n_rows,):
            raise ValueError(f"Right-hand side has shape {b.shape}, expected ({matrix.n_rows},).")
        if x_star is not None and np.shape(x_star) != (matrix.n_cols,):
            raise ValueError(f"Known solution has shape {np.shape(x_star)}, expected ({matrix.n_cols},).")
        self.cfg: SolverConfig = cfg
        self.row_order: Optional[IndexArray] = None
        if cfg.shuffle_rows:
            self.row_order = np.random.default_rng([cfg.seed, 0]).permutation(matrix.n_rows)
            matrix, b = matrix.take_rows(self.row_order), b[self.row_order]
        self.matrix: SparseRowMatrix = matrix
        self.b: Vector = b
        self.x_star: Optional[Vector] = None if x_star is None else np.asarray(x_star, dtype=np.float64)
        self.recorder: TraceRecorder = TraceRecorder()
        self._counter: FlopCounter = FlopCounter()
        self._window: Optional[SearchWindow] = None
        self._plans: Optional[Iterator[EpochPlan]] = (
            iter_epoch_plans(matrix, cfg.seed, cfg.weighting) if cfg.variant.is_randomized else None)
        self._breakdown_resets: int = 0

    def _error(self, x: Vector) -> Optional[float]:
        return None if self.x_star is None else float(np.linalg.norm(x - self.x_star))

    def run(self, x0: Vector) -> IterationTrace:
        """
        Iterate from x0 until the stopping rule fires or the cycle budget is spent.
        :param x0: The initial iterate of length n.
        :return: The IterationTrace of the run.
        """
        x: Vector = np.array(x0, dtype=np.float64, copy=True)
        if x.shape != (self.matrix.n_cols,):
            raise ValueError(f"Initial iterate has shape {x.shape}, expected ({self.matrix.n_cols},).")
        variant: Variant = self.cfg.variant
        if variant.is_windowed:
            self._window = SearchWindow.start(x, self.cfg.ell)
        trace: IterationTrace = IterationTrace(variant=variant, ell=self.cfg.ell if variant.is_windowed else None)
        LOG.info(f"Running {trace.label()} on {self.matrix} for at most {self.cfg.max_cycles} cycles.")

        while len(self.recorder) < self.cfg.max_cycles:
            cycle = self._random_cycle if variant.is_randomized else self._deterministic_cycle
            x, solved = cycle(x)
            if solved:
                trace.status = TerminalStatus.SOLVED
                break

        trace.records = self.recorder.get_records()
        trace.breakdown_resets = self._breakdown_resets
        trace.final_x = x
        trace.final_error = self._error(x)
        LOG.info(f"{trace.label()} finished with status {trace.status} after {len(trace.records)} cycles"
                 + (f", final error {trace.final_error:.3e}." if trace.final_error is not None else "."))
        return trace

    def _deterministic_cycle(self, x: Vector) -> tuple[Vector, bool]:
        """Internal method running one full cycle from x and applying the variant's step."""
        error: Optional[float] = self._error(x)
        outcome: SweepOutcome = sweep_cycle(self.matrix, self.b, x)
        self._counter.add(outcome.flops)
        d: Vector = outcome.endpoint - x
        delta: float = float(d @ d)
        if delta <= stopping_threshold(self.cfg.tol, float(x @ x)):
            self._record_converged(error, outcome, delta)
            return x, True
        return self._accelerate(x, error, outcome, delta)

    def _random_cycle(self, x: Vector) -> tuple[Vector, bool]:
        """Internal method drawing epochs from x until one is accepted and applying the variant's step."""
        error: Optional[float] = self._error(x)
        guarded: GuardedEpoch = run_random_epoch_guarded(self.matrix, self.b, x, self._plans,
                                                         self.cfg.max_no_progress,
                                                         self.cfg.max_cycles - len(self.recorder))
        for rejected in guarded.rejected:
            self.recorder.record_cycle(error=error, rho=rejected.rho, delta=0.0, flops=rejected.flops,
                                       kind=StepKind.REJECTED)
        if guarded.accepted is None:
            if guarded.cap_reached:
                LOG.warning(f"{self.cfg.max_no_progress} consecutive epochs made no progress; "
                            f"treating the iterate as solved.")
            return x, guarded.cap_reached
        outcome: SweepOutcome = guarded.accepted
        self._counter.add(outcome.flops)
        d: Vector = outcome.endpoint - x
        return self._accelerate(x, error, outcome, float(d @ d))

    def _accelerate(self, x: Vector, error: Optional[float], outcome: SweepOutcome,
                    delta: float) -> tuple[Vector, bool]:
        """Internal method turning the outcome of an accepted cycle into the next iterate and recording it."""
        variant: Variant = self.cfg.variant
        try:
            if variant in (Variant.K, Variant.RK):
                self.recorder.record_cycle(error=error, rho=outcome.rho, delta=delta, flops=self._counter.take(),
                                           kind=StepKind.PLAIN, predicted_gain=plain_cycle_gain(outcome.rho))
                return outcome.endpoint, False
            if variant in (Variant.K_LS, Variant.RK_LS):
                x_next, s, gain = line_search_step(x, outcome, self._counter)
                self.recorder.record_cycle(error=error, rho=outcome.rho, delta=delta, flops=self._counter.take(),
                                           kind=StepKind.LINE_SEARCH, gamma=gamma(outcome.rho, delta),
                                           s_under=s, predicted_gain=gain)
                return x_next, False
            return self._affine_cycle(x, error, outcome, delta), False
        except IterateSolved:
            self._record_converged(error, outcome, delta)
            return x, True

    def _affine_cycle(self, x: Vector, error: Optional[float], outcome: SweepOutcome, delta: float) -> Vector:
        window: SearchWindow = self._window
        columns: int = window.columns
        try:
            if self.cfg.variant is Variant.K_AFF_NAIVE:
                x_next, solution = affine_step_naive(window, x, outcome, self._counter)
                window.advance(x_next, solution.predicted_gain)
            else:
                x_next, solution, _ = affine_step_fast(window, x, outcome, self.cfg.breakdown_threshold,
                                                       self._counter)
        except BreakdownError as e:
            self._breakdown_resets += 1
            LOG.warning(f"Search window reset at cycle {len(self.recorder)}: {e}")
            window.reset()
            columns = 0
            x_next, solution = affine_step_naive(window, x, outcome, self._counter)
            window.advance(x_next, solution.predicted_gain)
        self.recorder.record_cycle(error=error, rho=outcome.rho, delta=delta, flops=self._counter.take(),
                                   kind=StepKind.AFFINE if columns else StepKind.LINE_SEARCH,
                                   gamma=solution.gamma, s_under=solution.s_under,
                                   predicted_gain=solution.predicted_gain, window_columns=columns)
        return x_next

    def _record_converged(self, error: Optional[float], outcome: SweepOutcome, delta: float) -> None:
        self.recorder.record_cycle(error=error, rho=outcome.rho, delta=delta, flops=self._counter.take(),
                                   kind=StepKind.CONVERGED)


def run(matrix: SparseRowMatrix, b: Vector, x0: Vector, x_star: Optional[Vector], cfg: SolverConfig) -> IterationTrace:
    """
    Solve Ax = b from x0 with the configured variant.
    :param matrix: The system matrix (A).
    :param b: Right-hand side of length m.
    :param x0: Initial iterate of length n.
    :param x_star: Optional known solution used to record the error of every iterate.
    :param cfg: The SolverConfig of the run.
    :return: The IterationTrace.
    """
    return KaczmarzSolver(matrix, b, cfg, x_star).run(x0)
