import logging
from typing import Iterable, Mapping, Optional

import numpy as np
import scipy.sparse
from sortedcontainers import SortedDict

from common.errors import MatrixValidationError
from common.types import IndexArray, Vector

LOG: logging.Logger = logging.getLogger(__name__)


class SparseRowMatrix:
    def __init__(self, n_rows: int, n_cols: int, row_offsets: Iterable[int], col_indices: Iterable[int],
                 values: Iterable[float]) -> None:
        """
        Immutable CSR storage of the system matrix A with cached squared row norms.
        :param n_rows: Number of equations (m).
        :param n_cols: Number of unknowns (n).
        :param row_offsets: m + 1 offsets into the entry arrays, starting at 0 and ending at nnz.
        :param col_indices: Column index of every stored entry, strictly increasing within a row.
        :param values: Value of every stored entry.
        """
        self.n_rows: int = int(n_rows)
        self.n_cols: int = int(n_cols)
        self.row_offsets: IndexArray = np.ascontiguousarray(row_offsets, dtype=np.int64)
        self.col_indices: IndexArray = np.ascontiguousarray(col_indices, dtype=np.int64)
        self.values: Vector = np.ascontiguousarray(values, dtype=np.float64)
        self._validate_structure()
        squares: Vector = self.values * self.values
        self.row_norm_sq: Vector = np.add.reduceat(squares, self.row_offsets[:-1])
        self._validate_rows()
        for array in (self.row_offsets, self.col_indices, self.values, self.row_norm_sq):
            array.flags.writeable = False

    def _validate_structure(self) -> None:
        """Internal method to check the CSR invariants that do not depend on the values."""
        if self.n_rows < 1 or self.n_cols < 1:
            raise MatrixValidationError(f"Matrix must have at least one row and one column, got "
                                        f"{self.n_rows}x{self.n_cols}.")
        offsets: IndexArray = self.row_offsets
        if offsets.shape != (self.n_rows + 1,):
            raise MatrixValidationError(f"Expected {self.n_rows + 1} row offsets, got {offsets.shape[0]}.")
        if offsets[0] != 0 or offsets[-1] != self.col_indices.shape[0]:
            raise MatrixValidationError(f"Row offsets must run from 0 to nnz={self.col_indices.shape[0]}.")
        if self.col_indices.shape != self.values.shape:
            raise MatrixValidationError("Column index and value arrays differ in length.")
        row_nnz: IndexArray = np.diff(offsets)
        if np.any(row_nnz < 0):
            raise MatrixValidationError("Row offsets must be nondecreasing.")
        empty: IndexArray = np.flatnonzero(row_nnz == 0)
        if empty.size:
            raise MatrixValidationError(f"Row {int(empty[0])} has no entries; every row of A must be nonzero.")
        if self.col_indices.size and (self.col_indices.min() < 0 or self.col_indices.max() >= self.n_cols):
            raise MatrixValidationError(f"Column indices must lie in [0, {self.n_cols}).")
        row_starts: np.ndarray = np.zeros(self.col_indices.shape[0], dtype=bool)
        row_starts[offsets[:-1]] = True
        increasing: np.ndarray = np.diff(self.col_indices) > 0
        if not np.all(increasing | row_starts[1:]):
            raise MatrixValidationError("Column indices must be strictly increasing within each row.")
        if not np.all(np.isfinite(self.values)):
            raise MatrixValidationError("Matrix values must be finite.")

    def _validate_rows(self) -> None:
        zero_rows: IndexArray = np.flatnonzero(self.row_norm_sq <= 0.0)
        if zero_rows.size:
            raise MatrixValidationError(f"Row {int(zero_rows[0])} is zero; every row of A must be nonzero.")

    @classmethod
    def from_rows(cls, n_cols: int, rows: Iterable[Mapping[int, float]]) -> "SparseRowMatrix":
        """
        Build a matrix from per-row mappings of column index to value.
        :param n_cols: Number of unknowns (n).
        :param rows: One mapping per row; iteration order of each mapping is ignored.
        :return: The assembled SparseRowMatrix.
        """
        offsets: list[int] = [0]
        cols: list[int] = []
        vals: list[float] = []
        for row in rows:
            for col in sorted(row):
                cols.append(col)
                vals.append(row[col])
            offsets.append(len(cols))
        return cls(len(offsets) - 1, n_cols, offsets, cols, vals)

    @classmethod
    def from_scipy(cls, matrix: scipy.sparse.sparray | scipy.sparse.spmatrix) -> "SparseRowMatrix":
        """Build a matrix from a scipy sparse matrix in any format, summing duplicate entries."""
        csr: scipy.sparse.csr_array = scipy.sparse.csr_array(matrix, dtype=np.float64)
        csr.sum_duplicates()
        return cls(csr.shape[0], csr.shape[1], csr.indptr, csr.indices, csr.data)

    @classmethod
    def from_dense(cls, array: np.ndarray) -> "SparseRowMatrix":
        """Build a matrix from a dense 2-D array, storing its nonzero entries."""
        return cls.from_scipy(scipy.sparse.csr_array(np.atleast_2d(np.asarray(array, dtype=np.float64))))

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def row_nnz(self) -> IndexArray:
        """Number of stored entries in every row."""
        return np.diff(self.row_offsets)

    def row(self, j: int) -> tuple[IndexArray, Vector]:
        """
        Get the sparsity pattern and values of a single row.
        :param j: The row index, 0 <= j < m.
        :return: A tuple of (column indices, values) as read-only views.
        """
        if not 0 <= j < self.n_rows:
            raise IndexError(f"Row index {j} out of range for a matrix with {self.n_rows} rows.")
        start, stop = self.row_offsets[j], self.row_offsets[j + 1]
        return self.col_indices[start:stop], self.values[start:stop]

    def take_rows(self, order: Iterable[int]) -> "SparseRowMatrix":
        """
        Build a new matrix whose i-th row is row order[i] of this matrix.
        :param order: Row indices of this matrix, typically a permutation.
        :return: The reordered SparseRowMatrix.
        """
        rows: IndexArray = np.asarray(order, dtype=np.int64)
        starts: IndexArray = self.row_offsets[rows]
        counts: IndexArray = self.row_offsets[rows + 1] - starts
        offsets: IndexArray = np.concatenate(([0], np.cumsum(counts)))
        gather: IndexArray = np.repeat(starts - offsets[:-1], counts) + np.arange(offsets[-1])
        return SparseRowMatrix(rows.shape[0], self.n_cols, offsets, self.col_indices[gather], self.values[gather])

    def to_scipy(self) -> scipy.sparse.csr_array:
        return scipy.sparse.csr_array((self.values, self.col_indices, self.row_offsets), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def matvec(self, x: Vector) -> Vector:
        """Compute A·x."""
        return self.to_scipy() @ np.asarray(x, dtype=np.float64)

    def __repr__(self) -> str:
        return f"SparseRowMatrix(m={self.n_rows}, n={self.n_cols}, nnz={self.nnz})"


class RowAccumulator:
    def __init__(self, n_rows: int, n_cols: int) -> None:
        """
        Collects (row, column, value) triplets into sorted rows, summing duplicate entries.
        :param n_rows: Number of rows of the matrix being assembled.
        :param n_cols: Number of columns of the matrix being assembled.
        """
        self.n_rows: int = n_rows
        self.n_cols: int = n_cols
        self._rows: list[SortedDict] = [SortedDict() for _ in range(n_rows)]

    def add(self, row: int, col: int, value: float) -> None:
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise IndexError(f"Entry ({row}, {col}) outside a {self.n_rows}x{self.n_cols} matrix.")
        entries: SortedDict = self._rows[row]
        entries[col] = entries.get(col, 0.0) + value

    def add_row(self, row: int, cols: Iterable[int], values: Iterable[float]) -> None:
        for col, value in zip(cols, values):
            self.add(row, int(col), float(value))

    def build(self, drop_empty: bool = False) -> SparseRowMatrix:
        """
        Assemble the collected entries into an immutable matrix.
        :param drop_empty: Silently remove rows without nonzero entries instead of rejecting them.
        :return: The assembled SparseRowMatrix.
        """
        rows: list[SortedDict] = self._rows
        if drop_empty:
            kept: list[SortedDict] = [row for row in rows if any(value != 0.0 for value in row.values())]
            if len(kept) < len(rows):
                LOG.info(f"Dropped {len(rows) - len(kept)} empty rows during assembly.")
            rows = kept
        return SparseRowMatrix.from_rows(self.n_cols, rows)


def row_dot(matrix: SparseRowMatrix, j: int, x: Vector) -> float:
    """
    Compute the inner product a_jᵀx over the sparsity pattern of row j.
    :param matrix: The system matrix (A).
    :param j: The row index, 0 <= j < m.
    :param x: A vector of length n.
    :return: The sum of value * x[col] over the row's stored entries.
    """
    if x.shape[0] != matrix.n_cols:
        raise IndexError(f"Vector of length {x.shape[0]} does not match {matrix.n_cols} columns.")
    cols, vals = matrix.row(j)
    return float(vals @ x[cols])


def random_sparse_matrix(n_rows: int, n_cols: int, density: float, seed: Optional[int] = None) -> SparseRowMatrix:
    """
    Draw a random matrix with standard normal entries and no zero rows.
    Every row keeps at least one entry so the matrix invariant holds for any density.
    :param n_rows: Number of rows (m).
    :param n_cols: Number of columns (n).
    :param density: Fraction of entries kept, in (0, 1].
    :param seed: Optional seed for the generator.
    :return: The random SparseRowMatrix.
    """
    rng: np.random.Generator = np.random.default_rng(seed)
    mask: np.ndarray = rng.random((n_rows, n_cols)) < density
    mask[np.arange(n_rows), rng.integers(0, n_cols, size=n_rows)] = True
    return SparseRowMatrix.from_dense(np.where(mask, rng.standard_normal((n_rows, n_cols)), 0.0))
