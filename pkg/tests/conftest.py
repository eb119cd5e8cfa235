from typing import Callable, TypeAlias

import numpy as np
import pytest

from backend import SparseRowMatrix

SystemFactory: TypeAlias = Callable[..., tuple[SparseRowMatrix, np.ndarray, np.ndarray]]


def _random_system(rng: np.random.Generator, n_rows: int, n_cols: int,
                   well_conditioned: bool = False) -> tuple[SparseRowMatrix, np.ndarray, np.ndarray]:
    if well_conditioned:
        dense: np.ndarray = np.eye(n_rows, n_cols) + 0.3 * rng.standard_normal((n_rows, n_cols)) / np.sqrt(n_cols)
    else:
        dense = rng.standard_normal((n_rows, n_cols))
    x_star: np.ndarray = rng.standard_normal(n_cols)
    return SparseRowMatrix.from_dense(dense), dense @ x_star, x_star


@pytest.fixture
def random_system() -> SystemFactory:
    """Factory of consistent systems (A, b, x*) with standard normal entries."""
    def factory(n_rows: int, n_cols: int, seed: int = 0, well_conditioned: bool = False):
        return _random_system(np.random.default_rng(seed), n_rows, n_cols, well_conditioned)
    return factory


@pytest.fixture
def two_row_system() -> tuple[SparseRowMatrix, np.ndarray, np.ndarray]:
    """Rows (1, 0) and (1, 1) with b = 0, started from x = (1, 1)."""
    return SparseRowMatrix.from_dense(np.array([[1.0, 0.0], [1.0, 1.0]])), np.zeros(2), np.ones(2)
