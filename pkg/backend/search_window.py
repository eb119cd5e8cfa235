from dataclasses import dataclass, field

import numpy as np

from common.types import Ell, Vector


def ringed_gram(alphas: list[float] | Vector) -> np.ndarray:
    """
    Assemble B = Σ_j α_j f_j f_jᵀ where f_j holds ones in its first j positions.
    Entry (i, j) of B is the sum of α_h over h >= max(i, j).
    :param alphas: The coefficients α, oldest first.
    :return: The dense symmetric matrix B.
    """
    a: Vector = np.asarray(alphas, dtype=np.float64)
    suffix_sums: Vector = np.cumsum(a[::-1])[::-1]
    index: np.ndarray = np.arange(a.shape[0])
    return suffix_sums[np.maximum.outer(index, index)]


@dataclass
class SearchWindow:
    """
    History of the latest iterates spanning the affine search space.
    :param capacity: Maximum number of stored iterates (ℓ), or None for an unbounded window.
    :param iterates: Stored iterates x_{j_k}, ..., x_k, oldest first.
    :param alphas: Coefficients α_i = γ_i s̲_i of the steps between consecutive stored iterates.
    :param window_start: Iteration index j_k of the oldest stored iterate.
    """
    capacity: Ell
    iterates: list[Vector] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    window_start: int = 0

    def __post_init__(self) -> None:
        if self.capacity is not None and self.capacity < 1:
            raise ValueError(f"Invalid value for capacity: {self.capacity}. Must be at least 1 or unbounded.")

    @classmethod
    def start(cls, x0: Vector, capacity: Ell) -> "SearchWindow":
        """Open a window holding only the initial iterate."""
        return cls(capacity=capacity, iterates=[np.array(x0, dtype=np.float64, copy=True)])

    @property
    def current(self) -> Vector:
        return self.iterates[-1]

    @property
    def current_index(self) -> int:
        return self.window_start + len(self.iterates) - 1

    @property
    def columns(self) -> int:
        """Number of directions k - j_k spanned besides the Kaczmarz step."""
        return len(self.iterates) - 1

    @property
    def is_full(self) -> bool:
        return self.capacity is not None and len(self.iterates) >= self.capacity

    def directions(self, x: Vector) -> np.ndarray:
        """
        Assemble V = (x_{j_k} - x, ..., x_{k-1} - x) column by column.
        :param x: The newest iterate x_k.
        :return: An n x (k - j_k) array.
        """
        if not self.columns:
            return np.empty((x.shape[0], 0))
        return np.stack(self.iterates[:-1], axis=1) - x[:, None]

    def advance(self, x_next: Vector, alpha: float) -> None:
        """
        Append the next iterate and the coefficient of the step leading to it.
        Once the window is over capacity, the oldest iterate and its coefficient are dropped together.
        :param x_next: The new iterate x_{k+1}.
        :param alpha: The coefficient γ_k s̲_k of the step.
        """
        self.iterates.append(x_next)
        self.alphas.append(float(alpha))
        if self.capacity is not None and len(self.iterates) > self.capacity:
            self.iterates.pop(0)
            self.alphas.pop(0)
            self.window_start += 1

    def reset(self) -> None:
        """Discard the history and restart the startup phase from the newest iterate."""
        self.window_start = self.current_index
        self.iterates = [self.current]
        self.alphas = []

    def gram(self) -> np.ndarray:
        """VᵀV as implied by the stored coefficients."""
        return ringed_gram(self.alphas)
