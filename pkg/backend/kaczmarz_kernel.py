"""
Row projections and Kaczmarz sweeps.
A sweep returns the endpoint of the projections together with the squared internal residual ρ = ‖r(x)‖²,
which is accumulated from the defects already evaluated by the projections.
"""
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from numba import njit

from backend.sparse_matrix import SparseRowMatrix, row_dot
from common.types import IndexArray, Vector
from common.variants import Weighting


@dataclass(kw_only=True, frozen=True)
class SweepOutcome:
    """
    Result of one deterministic cycle or one random epoch.
    :param endpoint: The point reached after the last projection, P(x).
    :param rho: Sum of squared normalised pre-projection defects (ρ = ‖r(x)‖²).
    :param residual: The vector r(x) in projection order, when it was requested.
    :param flops: Floating point operations spent by the sweep.
    :param projections: Number of row projections performed (m for a full cycle or epoch).
    """
    endpoint: Vector
    rho: float
    residual: Optional[Vector]
    flops: int
    projections: int


@dataclass(kw_only=True, frozen=True)
class EpochPlan:
    """
    Row order of one random epoch.
    :param indices: The m row indices projected onto, in order (i_{k,0}, ..., i_{k,m-1}).
    :param seed: Seed of the run the plan was drawn for.
    :param epoch: Epoch counter the plan was drawn for.
    :param weighting: The sampling scheme used to draw the indices.
    """
    indices: IndexArray
    seed: int
    epoch: int = 0
    weighting: Weighting = Weighting.UNIFORM


@njit(cache=True, nogil=True)
def _sweep_rows(row_offsets, col_indices, values, row_norm_sq, b, x, order, residual):
    rho = 0.0
    for t in range(order.shape[0]):
        j = order[t]
        start = row_offsets[j]
        stop = row_offsets[j + 1]
        dot = 0.0
        for e in range(start, stop):
            dot += values[e] * x[col_indices[e]]
        defect = dot - b[j]
        coefficient = defect / row_norm_sq[j]
        for e in range(start, stop):
            x[col_indices[e]] -= coefficient * values[e]
        rho += defect * coefficient
        if residual.shape[0] > 0:
            residual[t] = defect / np.sqrt(row_norm_sq[j])
    return rho


def _check_dimensions(matrix: SparseRowMatrix, b: Vector, x: Vector) -> None:
    if b.shape != (matrix.n_rows,) or x.shape != (matrix.n_cols,):
        raise ValueError(f"Dimension mismatch: A is {matrix.n_rows}x{matrix.n_cols}, b has shape {b.shape}, "
                         f"x has shape {x.shape}.")


def _sweep(matrix: SparseRowMatrix, b: Vector, x: Vector, order: IndexArray, with_residual: bool) -> SweepOutcome:
    endpoint: Vector = np.array(x, dtype=np.float64, copy=True)
    residual: Vector = np.empty(order.shape[0] if with_residual else 0, dtype=np.float64)
    rho: float = _sweep_rows(matrix.row_offsets, matrix.col_indices, matrix.values, matrix.row_norm_sq,
                             np.asarray(b, dtype=np.float64), endpoint, order, residual)
    touched: int = int(matrix.row_nnz()[order].sum())
    return SweepOutcome(endpoint=endpoint, rho=float(rho), residual=residual if with_residual else None,
                        flops=4 * touched + order.shape[0], projections=order.shape[0])


def project_row(matrix: SparseRowMatrix, j: int, b_j: float, x: Vector) -> Vector:
    """
    Project x onto the hyperplane H_j = {z : a_jᵀz = b_j}.
    Only the positions in row j's sparsity pattern change.
    :param matrix: The system matrix (A).
    :param j: The row index.
    :param b_j: Right-hand side entry of row j.
    :param x: The point to project.
    :return: P_j(x) as a new vector.
    """
    cols, vals = matrix.row(j)
    coefficient: float = (b_j - row_dot(matrix, j, x)) / matrix.row_norm_sq[j]
    projected: Vector = np.array(x, dtype=np.float64, copy=True)
    projected[cols] += coefficient * vals
    return projected


def sweep_cycle(matrix: SparseRowMatrix, b: Vector, x: Vector, with_residual: bool = False) -> SweepOutcome:
    """
    Run one full Kaczmarz cycle P = P_m ∘ ... ∘ P_1 from x.
    Time Complexity: O(nnz(A)), costed at 4 nnz(A) + m flops.
    :param matrix: The system matrix (A).
    :param b: Right-hand side of length m.
    :param x: Start point of length n; left untouched.
    :param with_residual: Materialise the residual vector r(x) as well as its squared norm.
    :return: The SweepOutcome with endpoint P(x) and ρ = ‖r(x)‖².
    """
    _check_dimensions(matrix, b, x)
    return _sweep(matrix, b, x, np.arange(matrix.n_rows, dtype=np.int64), with_residual)


def sweep_epoch_random(matrix: SparseRowMatrix, b: Vector, x: Vector, plan: EpochPlan,
                       with_residual: bool = False) -> SweepOutcome:
    """
    Run one random epoch, projecting onto the rows listed by the plan in order.
    ρ accumulates the squared normalised defects of the sampled rows, i.e. the residual of the subsampled system.
    :param matrix: The system matrix (A).
    :param b: Right-hand side of length m.
    :param x: Start point of length n; left untouched.
    :param plan: The epoch plan holding exactly m row indices.
    :param with_residual: Materialise the residual vector of the sampled system.
    :return: The SweepOutcome of the epoch.
    """
    _check_dimensions(matrix, b, x)
    order: IndexArray = np.asarray(plan.indices, dtype=np.int64)
    if order.shape != (matrix.n_rows,):
        raise ValueError(f"Epoch plan must hold exactly {matrix.n_rows} indices, got {order.shape[0]}.")
    if order.size and (order.min() < 0 or order.max() >= matrix.n_rows):
        raise IndexError(f"Epoch plan indices must lie in [0, {matrix.n_rows}).")
    return _sweep(matrix, b, x, order, with_residual)


def epoch_generator(seed: int, epoch: int) -> np.random.Generator:
    """Counter-based generator for one epoch; index j of the epoch is its j-th draw."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, epoch])))


def draw_epoch_plan(matrix: SparseRowMatrix, seed: int, epoch: int,
                    weighting: Weighting = Weighting.UNIFORM) -> EpochPlan:
    """
    Draw the m row indices of one random epoch, with replacement.
    :param matrix: The system matrix (A).
    :param seed: Seed of the run.
    :param epoch: Epoch counter, so every epoch has its own reproducible stream.
    :param weighting: Uniform sampling, or sampling proportional to ‖a_j‖².
    :return: The EpochPlan.
    """
    rng: np.random.Generator = epoch_generator(seed, epoch)
    m: int = matrix.n_rows
    if weighting is Weighting.ROW_NORM:
        indices: IndexArray = rng.choice(m, size=m, p=matrix.row_norm_sq / matrix.row_norm_sq.sum())
    else:
        indices = rng.integers(0, m, size=m)
    return EpochPlan(indices=indices.astype(np.int64), seed=seed, epoch=epoch, weighting=weighting)


def iter_epoch_plans(matrix: SparseRowMatrix, seed: int, weighting: Weighting = Weighting.UNIFORM,
                     first_epoch: int = 0) -> Iterator[EpochPlan]:
    """Yield the plans of epochs first_epoch, first_epoch + 1, ... indefinitely."""
    epoch: int = first_epoch
    while True:
        yield draw_epoch_plan(matrix, seed, epoch, weighting)
        epoch += 1
