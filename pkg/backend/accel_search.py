"""
Acceleration steps applied after a Kaczmarz cycle: the exact line-search, the naive affine search
through the small normal equations MᵀMs = γe, and the updated affine search that replaces
the normal equations by an explicit tridiagonal inverse and a bordered solve.
All of them minimise ‖ξ - x*‖ over their search space without knowing x*.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from backend.cost_model import FlopCounter, charge, dense_solve_flops
from backend.kaczmarz_kernel import SweepOutcome
from backend.search_window import SearchWindow
from common.errors import BreakdownError, IterateSolved
from common.functions import gamma as gamma_of, line_search_gain, line_search_step_size
from common.types import LineSearchResult, Vector

BREAKDOWN_THRESHOLD: float = 1e-14


@dataclass(kw_only=True, frozen=True)
class StepSolution:
    """
    Solution s = (s̄, s̲) of MᵀMs = γe for one affine step.
    :param s_bar: Coefficients on the window directions V.
    :param s_under: Coefficient on the Kaczmarz step d = P(x_k) - x_k.
    :param gamma: The scale γ_k = (ρ_k + δ_k) / 2.
    """
    s_bar: Vector
    s_under: float
    gamma: float

    @property
    def predicted_gain(self) -> float:
        """Decrease of the squared error, γ s̲."""
        return self.gamma * self.s_under


def _step_direction(x: Vector, outcome: SweepOutcome, counter: Optional[FlopCounter]) -> tuple[Vector, float]:
    """Internal method computing d = P(x) - x and δ = ‖d‖², raising IterateSolved when d vanishes."""
    d: Vector = outcome.endpoint - x
    delta: float = float(d @ d)
    charge(counter, 3 * x.shape[0] + 2 * outcome.projections)
    if delta == 0.0:
        raise IterateSolved("The Kaczmarz cycle left the iterate unchanged.")
    return d, delta


def _line_search(x: Vector, outcome: SweepOutcome,
                 counter: Optional[FlopCounter]) -> tuple[Vector, float, float, float]:
    d, delta = _step_direction(x, outcome, counter)
    s: float = line_search_step_size(outcome.rho, delta)
    charge(counter, 2 * x.shape[0])
    return x + s * d, s, line_search_gain(outcome.rho, delta), delta


def line_search_step(x: Vector, outcome: SweepOutcome, counter: Optional[FlopCounter] = None) -> LineSearchResult:
    """
    Minimise the error along the line through x and P(x).
    Time Complexity: O(n), costed at 5n + 2m flops on top of the cycle.
    :param x: The iterate the cycle started from (x_k).
    :param outcome: The SweepOutcome of the cycle from x.
    :param counter: Optional flop counter to charge.
    :return: A tuple of the next iterate, the step size s* and the predicted gain.
    """
    x_next, s, gain, _ = _line_search(x, outcome, counter)
    return x_next, s, gain


def _line_search_solution(x: Vector, outcome: SweepOutcome,
                          counter: Optional[FlopCounter]) -> tuple[Vector, StepSolution]:
    x_next, s, _, delta = _line_search(x, outcome, counter)
    return x_next, StepSolution(s_bar=np.empty(0), s_under=s, gamma=gamma_of(outcome.rho, delta))


def affine_step_naive(window: SearchWindow, x: Vector, outcome: SweepOutcome,
                      counter: Optional[FlopCounter] = None) -> tuple[Vector, StepSolution]:
    """
    Minimise the error over aff(x_{j_k}, ..., x_k, P(x_k)) by assembling and factorising MᵀM.
    With an empty window this is exactly the line-search step.
    Time Complexity: O(ℓ²n + ℓ³).
    :param window: The search window whose newest iterate is x.
    :param x: The iterate the cycle started from (x_k).
    :param outcome: The SweepOutcome of the cycle from x.
    :param counter: Optional flop counter to charge.
    :return: A tuple of the next iterate and the StepSolution; the window is not modified.
    """
    if not window.columns:
        return _line_search_solution(x, outcome, counter)
    d, delta = _step_direction(x, outcome, counter)
    n: int = x.shape[0]
    size: int = window.columns
    gamma: float = gamma_of(outcome.rho, delta)
    m_matrix: np.ndarray = np.column_stack((window.directions(x), d))
    normal: np.ndarray = m_matrix.T @ m_matrix
    rhs: Vector = np.zeros(size + 1)
    rhs[-1] = gamma
    try:
        s: Vector = cho_solve(cho_factor(normal, lower=True), rhs)
    except LinAlgError as e:
        raise BreakdownError(f"MᵀM is not numerically positive definite ({e}).") from e
    charge(counter, size * n + (size + 1) * (size + 2) // 2 * n + dense_solve_flops(size + 1) + 2 * (size + 1) * n)
    solution: StepSolution = StepSolution(s_bar=s[:-1], s_under=float(s[-1]), gamma=gamma)
    if not np.all(np.isfinite(s)) or not solution.predicted_gain > 0.0:
        raise BreakdownError(f"Affine step predicts a non-positive gain {solution.predicted_gain:.3e}.")
    return x + m_matrix @ s, solution


def tridiag_apply(alphas: list[float] | Vector, p: Vector, counter: Optional[FlopCounter] = None) -> Vector:
    """
    Apply the explicit tridiagonal inverse C(α) of B = Σ α_j f_j f_jᵀ to p.
    C has diagonal (1/α_1, 1/α_1 + 1/α_2, ..., 1/α_{L-1} + 1/α_L) and off-diagonals -1/α_1, ..., -1/α_{L-1}.
    Time Complexity: O(L), costed at 4L flops.
    :param alphas: The coefficients α, oldest first.
    :param p: A vector of the same length.
    :return: q = C(α) p, equivalently the solution of B q = p.
    """
    a: Vector = np.asarray(alphas, dtype=np.float64)
    if a.shape != p.shape:
        raise ValueError(f"Expected {a.shape[0]} entries in p, got {p.shape[0]}.")
    if np.any(a == 0.0):
        raise BreakdownError("Zero coefficient in the ringed Gram matrix.")
    inverse: Vector = 1.0 / a
    diagonal: Vector = inverse.copy()
    diagonal[1:] += inverse[:-1]
    q: Vector = diagonal * p
    q[:-1] -= inverse[:-1] * p[1:]
    q[1:] -= inverse[:-1] * p[:-1]
    charge(counter, 4 * a.shape[0])
    return q


def bordered_solve(q: Vector, p: Vector, delta: float, gamma: float, threshold: float = BREAKDOWN_THRESHOLD,
                   counter: Optional[FlopCounter] = None) -> StepSolution:
    """
    Solve [[B, p], [pᵀ, δ]] s = γe given q = B⁻¹p.
    Time Complexity: O(L), costed at 3L + 2 flops.
    :param q: The vector B⁻¹p.
    :param p: The border vector Vᵀd.
    :param delta: The corner entry δ = ‖d‖².
    :param gamma: The right-hand side scale γ.
    :param threshold: Relative size of δ - pᵀq below which the system counts as singular.
    :param counter: Optional flop counter to charge.
    :return: The StepSolution with s̲ = γ / (δ - pᵀq) and s̄ = -s̲ q.
    """
    p_q: float = float(p @ q) if p.shape[0] else 0.0
    denominator: float = delta - p_q
    if abs(denominator) <= threshold * max(delta, abs(p_q)):
        raise BreakdownError(f"Bordered system is singular: δ - pᵀq = {denominator:.3e}.")
    s_under: float = gamma / denominator
    charge(counter, 3 * p.shape[0] + 2)
    return StepSolution(s_bar=-s_under * q, s_under=s_under, gamma=gamma)


def affine_step_fast(window: SearchWindow, x: Vector, outcome: SweepOutcome,
                     threshold: float = BREAKDOWN_THRESHOLD,
                     counter: Optional[FlopCounter] = None) -> tuple[Vector, StepSolution, SearchWindow]:
    """
    Minimise the error over aff(x_{j_k}, ..., x_k, P(x_k)) in linear time and advance the window.
    VᵀV is never formed: its inverse is the tridiagonal C(α) of the stored step coefficients.
    Time Complexity: O(ℓn).
    :param window: The search window whose newest iterate is x; advanced in place.
    :param x: The iterate the cycle started from (x_k).
    :param outcome: The SweepOutcome of the cycle from x.
    :param threshold: Relative breakdown threshold for the bordered solve and the stored coefficients.
    :param counter: Optional flop counter to charge.
    :return: A tuple of the next iterate, the StepSolution and the advanced window.
    """
    if not window.columns:
        x_next, solution = _line_search_solution(x, outcome, counter)
        window.advance(x_next, solution.predicted_gain)
        return x_next, solution, window
    d, delta = _step_direction(x, outcome, counter)
    gamma: float = gamma_of(outcome.rho, delta)
    if min(window.alphas) <= threshold * gamma:
        raise BreakdownError(f"Window coefficient {min(window.alphas):.3e} lost positivity.")
    n: int = x.shape[0]
    size: int = window.columns
    directions: np.ndarray = window.directions(x)
    p: Vector = directions.T @ d
    charge(counter, size * n + 2 * size * n)
    q: Vector = tridiag_apply(window.alphas, p, counter)
    solution: StepSolution = bordered_solve(q, p, delta, gamma, threshold, counter)
    if not solution.predicted_gain > 0.0:
        raise BreakdownError(f"Affine step predicts a non-positive gain {solution.predicted_gain:.3e}.")
    x_next: Vector = x + directions @ solution.s_bar + solution.s_under * d
    charge(counter, 2 * (size + 1) * n)
    window.advance(x_next, solution.predicted_gain)
    return x_next, solution, window
