"""Common type definitions used across the project."""
from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Optional, TypeAlias, TypedDict

import numpy as np
from numpy.typing import NDArray

if TYPE_CHECKING:
    from backend.sparse_matrix import SparseRowMatrix as _SparseRowMatrix
    from backend.trace import IterationTrace as _IterationTrace

# Primitive types
Number: TypeAlias = int | float
Vector: TypeAlias = NDArray[np.float64]
IndexArray: TypeAlias = NDArray[np.int64]
Ell: TypeAlias = Optional[int]

# Class type aliases
IterationTrace: TypeAlias = "_IterationTrace"

# Backend types
LineSearchResult: TypeAlias = tuple[Vector, float, float]
Problem: TypeAlias = tuple["_SparseRowMatrix", Vector, Optional[Vector]]
ValidationFunction: TypeAlias = Callable[[Number], bool]

# CSV types
CsvValue: TypeAlias = Number | str | None
CsvRow: TypeAlias = dict[str, CsvValue]


class FlopReport(TypedDict):
    checked_cycles: int
    max_abs_deviation: float
    max_rel_deviation: float
    exact: bool
