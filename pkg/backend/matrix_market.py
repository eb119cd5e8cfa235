"""
MatrixMarket exchange of system matrices through scipy.io and plain-text exchange of vectors.
Only the `coordinate real general` flavour is accepted.
"""
import logging
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from backend.sparse_matrix import SparseRowMatrix
from common.errors import MatrixFormatError, MatrixValidationError
from common.types import Vector

LOG: logging.Logger = logging.getLogger(__name__)

_SUPPORTED: tuple[str, str, str] = ("coordinate", "real", "general")
# raised by the scipy.io readers on malformed input
_PARSE_ERRORS: tuple[type[Exception], ...] = (ValueError, TypeError, IndexError, OverflowError, RuntimeError)


def _check_header(path: str) -> int:
    """Internal method validating the banner and size line, returning the announced entry count."""
    try:
        n_rows, n_cols, entries, layout, field, symmetry = scipy.io.mminfo(path)
    except _PARSE_ERRORS as e:
        raise MatrixFormatError(path, 1, f"invalid MatrixMarket header ({e})") from e
    if (layout, field, symmetry) != _SUPPORTED:
        raise MatrixFormatError(path, 1, f"unsupported header '{layout} {field} {symmetry}', "
                                         f"expected '{' '.join(_SUPPORTED)}'")
    if n_rows < 1 or n_cols < 1:
        raise MatrixFormatError(path, None, f"invalid size line {n_rows} {n_cols} {entries}")
    return int(entries)


def read_matrix_market(path: str | Path) -> SparseRowMatrix:
    """
    Read a system matrix from a MatrixMarket coordinate file. Duplicate entries are summed.
    :param path: Path to a `coordinate real general` MatrixMarket file.
    :return: The parsed SparseRowMatrix.
    """
    name: str = str(path)
    expected: int = _check_header(name)
    try:
        entries: scipy.sparse.coo_array = scipy.sparse.coo_array(scipy.io.mmread(name))
    except _PARSE_ERRORS as e:
        raise MatrixFormatError(name, None, f"invalid entries ({e})") from e
    if entries.nnz != expected:
        raise MatrixFormatError(name, None, f"size line announces {expected} entries, found {entries.nnz}")
    try:
        matrix: SparseRowMatrix = SparseRowMatrix.from_scipy(entries)
    except MatrixValidationError as e:
        raise MatrixValidationError(f"{name}: {e}") from e
    LOG.info(f"Read {matrix} from {name}.")
    return matrix


def write_matrix_market(matrix: SparseRowMatrix, path: str | Path) -> None:
    """
    Write a system matrix as a MatrixMarket coordinate file with full double precision.
    :param matrix: The matrix to write.
    :param path: Destination path, written as given; parent directories must exist.
    """
    with open(path, "wb") as file:
        scipy.io.mmwrite(file, matrix.to_scipy(), field="real", precision=17, symmetry="general")


def read_vector(path: str | Path) -> Vector:
    """Read a plain-text vector with one value per line."""
    try:
        vector: Vector = np.loadtxt(path, dtype=np.float64, ndmin=1, encoding="ascii")
    except ValueError as e:
        raise MatrixFormatError(str(path), None, f"invalid vector file ({e})") from e
    if vector.ndim != 1:
        raise MatrixFormatError(str(path), None, "expected one value per line")
    return vector


def write_vector(vector: Vector, path: str | Path) -> None:
    """Write a vector with one value per line at full double precision."""
    np.savetxt(path, np.asarray(vector, dtype=np.float64), fmt="%.17g", newline="\n")
