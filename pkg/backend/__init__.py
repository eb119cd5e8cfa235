import backend.run  # noqa: F401  # load the CLI submodule first so the `run` re-export below is not shadowed by it
from backend.accel_search import (StepSolution, affine_step_fast, affine_step_naive, bordered_solve, line_search_step,
                                  tridiag_apply)
from backend.cost_model import CostModel, FlopCounter, flop_check
from backend.kaczmarz_kernel import (EpochPlan, SweepOutcome, draw_epoch_plan, iter_epoch_plans, project_row,
                                     sweep_cycle, sweep_epoch_random)
from backend.matrix_market import read_matrix_market, read_vector, write_matrix_market, write_vector
from backend.recorder import TraceRecorder
from backend.search_window import SearchWindow, ringed_gram
from backend.solver import GuardedEpoch, KaczmarzSolver, run, run_random_epoch_guarded
from backend.solver_config import SolverConfig
from backend.sparse_matrix import RowAccumulator, SparseRowMatrix, random_sparse_matrix, row_dot
from backend.tomo_bench import TomoProblem, export_problem, make_tomo_problem, parallel_tomo, shepp_logan
from backend.trace import CycleRecord, IterationTrace, write_compare_csv, write_trace_csv
