from dataclasses import replace

import numpy as np
import pytest

from backend import (FlopCounter, SearchWindow, SparseRowMatrix, affine_step_fast, affine_step_naive, bordered_solve,
                     line_search_step, ringed_gram, sweep_cycle, tridiag_apply)
from common.errors import BreakdownError, IterateSolved


def _build_window(matrix, b, x0, capacity, steps):
    """Run fast affine steps from x0 and return the window and the iterate reached."""
    x = x0.copy()
    window = SearchWindow.start(x, capacity)
    for _ in range(steps):
        x, _, window = affine_step_fast(window, x, sweep_cycle(matrix, b, x))
    return window, x


def _affine_oracle(window, x, endpoint, x_star):
    """Orthogonal projection of x* onto aff(window iterates, endpoint) by dense least squares."""
    basis = np.column_stack(window.iterates[:-1] + [endpoint]) - x[:, None]
    coefficients = np.linalg.lstsq(basis, x_star - x, rcond=None)[0]
    return x + basis @ coefficients


def test_when_rows_orthogonal_then_line_search_lands_on_endpoint() -> None:
    matrix = SparseRowMatrix.from_dense(np.array([[1.0, 1.0], [1.0, -1.0]]))
    x_star = np.array([2.0, 3.0])
    outcome = sweep_cycle(matrix, matrix.matvec(x_star), np.zeros(2))
    x_next, s, _ = line_search_step(np.zeros(2), outcome)

    assert s == pytest.approx(1.0)
    np.testing.assert_allclose(x_next, outcome.endpoint)


def test_when_line_searching_two_rows_then_match_closed_form(two_row_system) -> None:
    matrix, b, x = two_row_system
    x_next, s, gain = line_search_step(x, sweep_cycle(matrix, b, x))

    assert s == pytest.approx(0.8)
    np.testing.assert_allclose(x_next, [-0.2, 0.6])
    assert gain == pytest.approx(1.6)
    assert float(x @ x) - float(x_next @ x_next) == pytest.approx(gain)


def test_when_residual_vanishes_then_line_search_takes_midpoint() -> None:
    matrix = SparseRowMatrix.from_dense(np.eye(2))
    outcome = sweep_cycle(matrix, np.array([1.0, 2.0]), np.zeros(2))
    outcome = replace(outcome, rho=0.0)

    assert line_search_step(np.zeros(2), outcome)[1] == 0.5


def test_when_cycle_is_stationary_then_signal_solved() -> None:
    matrix = SparseRowMatrix.from_dense(np.eye(2))
    x = np.array([1.0, 2.0])

    with pytest.raises(IterateSolved):
        line_search_step(x, sweep_cycle(matrix, x.copy(), x))


def test_when_sampling_step_sizes_then_line_search_is_optimal(random_system) -> None:
    rng = np.random.default_rng(3)
    for seed in range(100):
        matrix, b, x_star = random_system(int(rng.integers(8, 30)), 4, seed=seed)
        x = rng.standard_normal(4)
        outcome = sweep_cycle(matrix, b, x)
        x_next, s, gain = line_search_step(x, outcome)
        d = outcome.endpoint - x
        best = float((x_next - x_star) @ (x_next - x_star))
        scale = float((x - x_star) @ (x - x_star))

        for t in np.linspace(-2.0, 3.0, 64):
            assert float((x + t * d - x_star) @ (x + t * d - x_star)) >= best - 1e-12 * scale
        assert scale - best == pytest.approx(gain, rel=1e-8)


def test_when_window_is_empty_then_naive_step_reduces_to_line_search(two_row_system) -> None:
    matrix, b, x = two_row_system
    outcome = sweep_cycle(matrix, b, x)
    x_naive, solution = affine_step_naive(SearchWindow.start(x, 3), x, outcome)
    x_line, s, gain = line_search_step(x, outcome)

    np.testing.assert_array_equal(x_naive, x_line)
    assert solution.s_under == s
    assert solution.s_bar.shape == (0,)
    assert solution.predicted_gain == gain
    assert solution.s_under == pytest.approx(solution.gamma / 2.5)


def test_when_window_is_empty_then_fast_step_reduces_to_line_search(two_row_system) -> None:
    matrix, b, x = two_row_system
    outcome = sweep_cycle(matrix, b, x)
    x_fast, solution, window = affine_step_fast(SearchWindow.start(x, 3), x, outcome)

    np.testing.assert_array_equal(x_fast, line_search_step(x, outcome)[0])
    assert window.columns == 1
    assert window.alphas == [solution.predicted_gain]


def test_when_affine_stepping_then_match_dense_projection_oracle(random_system) -> None:
    rng = np.random.default_rng(8)
    for seed in range(100):
        n = int(rng.integers(6, 16))
        matrix, b, x_star = random_system(2 * n, n, seed=seed)
        columns = int(rng.integers(1, 6))
        window, x = _build_window(matrix, b, rng.standard_normal(n), columns + 1, columns)
        outcome = sweep_cycle(matrix, b, x)
        error_sq = float((x - x_star) @ (x - x_star))
        x_next, solution = affine_step_naive(window, x, outcome)

        oracle = _affine_oracle(window, x, outcome.endpoint, x_star)
        np.testing.assert_allclose(x_next, oracle, rtol=0, atol=1e-8 * np.sqrt(error_sq))
        error_next = np.linalg.norm(x_next - x_star)
        for member in window.iterates + [outcome.endpoint]:
            step = np.linalg.norm(member - x_next)
            assert abs(float((member - x_next) @ (x_next - x_star))) <= (
                1e-8 * step * max(error_next, 1e-6 * np.linalg.norm(x_star)))
        v = window.directions(x)
        m_matrix = np.column_stack((v, outcome.endpoint - x))
        decrease = error_sq - error_next ** 2
        # det(VᵀV) / det(MᵀM) is 1 / r² for the last diagonal entry r of the triangular factor of M
        r_last = np.linalg.qr(m_matrix, mode="r")[-1, -1]
        predicted = solution.gamma ** 2 / r_last ** 2
        assert decrease == pytest.approx(predicted, rel=1e-7)
        assert decrease == pytest.approx(solution.predicted_gain, rel=1e-6)


def test_when_window_has_one_column_then_gain_is_amplified_line_search_gain(random_system) -> None:
    matrix, b, x_star = random_system(16, 6, seed=12)
    window, x = _build_window(matrix, b, np.zeros(6), 2, 1)
    outcome = sweep_cycle(matrix, b, x)
    d = outcome.endpoint - x
    v = window.directions(x)[:, 0]
    cos_sq = float(v @ d) ** 2 / (float(v @ v) * float(d @ d))
    _, _, line_gain = line_search_step(x, outcome)
    x_next, _ = affine_step_naive(window, x, outcome)
    measured = float((x - x_star) @ (x - x_star)) - float((x_next - x_star) @ (x_next - x_star))

    assert measured == pytest.approx(line_gain / (1.0 - cos_sq), rel=1e-7)


def test_when_applying_tridiagonal_inverse_then_match_small_cases() -> None:
    np.testing.assert_allclose(tridiag_apply([2.0], np.array([4.0])), [2.0])
    np.testing.assert_allclose(tridiag_apply([1.0, 1.0], np.array([1.0, 1.0])), [0.0, 1.0])


def test_when_applying_tridiagonal_inverse_then_invert_ringed_gram() -> None:
    rng = np.random.default_rng(0)
    for _ in range(1000):
        length = int(rng.integers(1, 13))
        alphas = rng.uniform(0.1, 10.0, size=length)
        p = rng.standard_normal(length)

        np.testing.assert_allclose(ringed_gram(alphas) @ tridiag_apply(alphas, p), p, rtol=1e-10,
                                   atol=1e-10 * np.abs(p).max())


def test_when_alpha_is_zero_then_tridiagonal_inverse_breaks_down() -> None:
    with pytest.raises(BreakdownError):
        tridiag_apply([1.0, 0.0], np.ones(2))


def test_when_bordered_solving_small_case_then_match_hand_solution() -> None:
    solution = bordered_solve(np.array([0.5]), np.array([1.0]), delta=1.0, gamma=1.0)

    assert solution.s_under == pytest.approx(2.0)
    np.testing.assert_allclose(solution.s_bar, [-1.0])
    np.testing.assert_allclose(np.array([[2.0, 1.0], [1.0, 1.0]]) @ [-1.0, 2.0], [0.0, 1.0])


def test_when_border_is_empty_then_step_is_gamma_over_delta() -> None:
    solution = bordered_solve(np.empty(0), np.empty(0), delta=4.0, gamma=3.0)

    assert solution.s_under == pytest.approx(0.75)
    assert solution.s_bar.shape == (0,)


def test_when_bordered_solving_random_instances_then_match_dense_solve_in_linear_flops() -> None:
    rng = np.random.default_rng(1)
    for _ in range(1000):
        length = int(rng.integers(1, 13))
        alphas = rng.uniform(0.1, 10.0, size=length)
        b_matrix = ringed_gram(alphas)
        p = rng.standard_normal(length)
        delta = float(p @ np.linalg.solve(b_matrix, p)) + rng.uniform(0.5, 5.0)
        gamma = rng.uniform(0.1, 5.0)
        counter = FlopCounter()
        solution = bordered_solve(tridiag_apply(alphas, p, counter), p, delta, gamma, counter=counter)
        g = np.block([[b_matrix, p[:, None]], [p[None, :], np.array([[delta]])]])
        expected = np.linalg.solve(g, np.r_[np.zeros(length), gamma])

        np.testing.assert_allclose(np.r_[solution.s_bar, solution.s_under], expected, rtol=1e-9,
                                   atol=1e-9 * np.abs(expected).max())
        assert counter.count == 7 * length + 2


def test_when_bordered_system_singular_then_break_down() -> None:
    with pytest.raises(BreakdownError):
        bordered_solve(np.array([1.0]), np.array([1.0]), delta=1.0, gamma=1.0)


def test_when_stepping_fast_and_naive_then_iterates_agree(random_system) -> None:
    for seed in range(20):
        matrix, b, x_star = random_system(20, 10, seed=seed, well_conditioned=True)
        window_fast = SearchWindow.start(np.zeros(10), 4)
        window_naive = SearchWindow.start(np.zeros(10), 4)
        x_fast = x_naive = np.zeros(10)
        scale = float(np.linalg.norm(x_star))
        for _ in range(6):
            x_fast, _, window_fast = affine_step_fast(window_fast, x_fast, sweep_cycle(matrix, b, x_fast))
            x_naive, solution = affine_step_naive(window_naive, x_naive, sweep_cycle(matrix, b, x_naive))
            window_naive.advance(x_naive, solution.predicted_gain)

            np.testing.assert_allclose(x_fast, x_naive, rtol=0, atol=1e-8 * scale)


def test_when_accumulating_predicted_gains_then_telescope_to_error_decrease(random_system) -> None:
    matrix, b, x_star = random_system(30, 12, seed=6, well_conditioned=True)
    x = np.zeros(12)
    window = SearchWindow.start(x, 5)
    gains = 0.0
    for _ in range(8):
        x, solution, window = affine_step_fast(window, x, sweep_cycle(matrix, b, x))
        gains += solution.predicted_gain

    assert float(x_star @ x_star) - float((x - x_star) @ (x - x_star)) == pytest.approx(gains, rel=1e-8)


def test_when_stepping_then_error_beats_plain_cycle(random_system) -> None:
    matrix, b, x_star = random_system(25, 10, seed=9)
    x = np.zeros(10)
    window = SearchWindow.start(x, 4)
    for _ in range(10):
        outcome = sweep_cycle(matrix, b, x)
        previous = np.linalg.norm(x - x_star)
        plain = np.linalg.norm(outcome.endpoint - x_star)
        x, _, window = affine_step_fast(window, x, outcome)

        assert np.linalg.norm(x - x_star) <= plain + 1e-12 * np.linalg.norm(x_star)
        assert plain <= previous + 1e-12 * np.linalg.norm(x_star)


def test_when_window_alpha_lost_positivity_then_fast_step_breaks_down(two_row_system) -> None:
    matrix, b, x = two_row_system
    window = SearchWindow.start(np.zeros(2), 3)
    window.advance(x, alpha=-1.0)

    with pytest.raises(BreakdownError):
        affine_step_fast(window, x, sweep_cycle(matrix, b, x))


def test_when_counting_fast_step_then_charge_linear_window_cost(random_system) -> None:
    matrix, b, _ = random_system(40, 20, seed=1)
    window, x = _build_window(matrix, b, np.zeros(20), 4, 3)
    counter = FlopCounter()
    affine_step_fast(window, x, sweep_cycle(matrix, b, x), counter=counter)

    columns = 3
    assert counter.count == 3 * 20 + 2 * 40 + 3 * columns * 20 + 4 * columns + 3 * columns + 2 + 2 * (columns + 1) * 20
