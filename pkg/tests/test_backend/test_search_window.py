import numpy as np
import pytest

from backend import SearchWindow, affine_step_fast, ringed_gram, sweep_cycle


def test_when_starting_window_then_hold_only_initial_iterate() -> None:
    window = SearchWindow.start(np.zeros(3), capacity=4)

    assert window.columns == 0
    assert window.current_index == 0
    assert window.directions(np.zeros(3)).shape == (3, 0)
    assert not window.is_full


def test_when_capacity_below_one_then_raise_value_error() -> None:
    with pytest.raises(ValueError) as e:
        SearchWindow(capacity=0)

    assert str(e.value) == "Invalid value for capacity: 0. Must be at least 1 or unbounded."


def test_when_advancing_past_capacity_then_drop_oldest_iterate_and_alpha() -> None:
    window = SearchWindow.start(np.zeros(2), capacity=3)
    for k in range(1, 5):
        window.advance(np.full(2, float(k)), alpha=float(k))

    assert window.is_full
    assert window.window_start == 2
    assert window.current_index == 4
    assert window.alphas == [3.0, 4.0]
    np.testing.assert_array_equal(window.iterates[0], [2.0, 2.0])


def test_when_window_is_unbounded_then_never_evict() -> None:
    window = SearchWindow.start(np.zeros(2), capacity=None)
    for k in range(1, 20):
        window.advance(np.full(2, float(k)), alpha=1.0)

    assert window.columns == 19
    assert window.window_start == 0
    assert not window.is_full


def test_when_resetting_then_keep_current_iterate() -> None:
    window = SearchWindow.start(np.zeros(2), capacity=5)
    window.advance(np.ones(2), alpha=1.0)
    window.advance(np.full(2, 2.0), alpha=0.5)
    window.reset()

    assert window.columns == 0
    assert window.alphas == []
    assert window.current_index == 2
    np.testing.assert_array_equal(window.current, [2.0, 2.0])


def test_when_assembling_ringed_gram_then_entries_are_suffix_sums() -> None:
    np.testing.assert_allclose(ringed_gram([1.0, 1.0]), [[2.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(ringed_gram([1.0, 2.0, 3.0]), [[6.0, 5.0, 3.0], [5.0, 5.0, 3.0], [3.0, 3.0, 3.0]])


def test_when_advancing_fast_steps_then_gram_matches_directions(random_system) -> None:
    matrix, b, _ = random_system(20, 8, seed=5, well_conditioned=True)
    x = np.zeros(8)
    window = SearchWindow.start(x, capacity=4)
    for _ in range(5):
        x, _, window = affine_step_fast(window, x, sweep_cycle(matrix, b, x))
        directions = window.directions(window.current)

        np.testing.assert_allclose(window.gram(), directions.T @ directions, rtol=1e-8,
                                   atol=1e-12 * float(np.abs(directions).max()) ** 2)
