"""Symmetric positive-definite matrices and the dense primitives built on them."""

from __future__ import annotations

import io
import os
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatch,
    EigenFailure,
    FormatError,
    NonFinite,
    NotPositiveDefinite,
    NotSymmetric,
    SingularTransform,
)

SYMMETRY_RTOL = 1e-10
SINGULAR_DET = 1e-12


class SpdMatrix:
    """An immutable, validated symmetric positive-definite matrix.

    The lower Cholesky factor is computed once at construction. It doubles
    as the positive-definiteness check and makes :func:`log_det` free.
    Use :func:`validate` (or the constructor) to build one.
    """

    __slots__ = ("_values", "_chol", "_log_det")

    def __init__(self, values):
        a = np.array(values, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFinite("matrix has non-finite entries")
        scale = np.maximum(1.0, np.abs(a))
        if np.any(np.abs(a - a.T) > SYMMETRY_RTOL * scale):
            raise NotSymmetric("matrix is not symmetric within tolerance")
        a = 0.5 * (a + a.T)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("Cholesky factorization failed") from None
        diag = np.diagonal(chol)
        if not np.all(diag > 0) or not np.all(np.isfinite(chol)):
            raise NotPositiveDefinite("Cholesky factorization has a non-positive pivot")
        a.setflags(write=False)
        chol.setflags(write=False)
        self._values = a
        self._chol = chol
        self._log_det = 2.0 * float(np.sum(np.log(diag)))

    @property
    def values(self) -> np.ndarray:
        """Read-only ``(d, d)`` array."""
        return self._values

    @property
    def cholesky(self) -> np.ndarray:
        """Read-only lower-triangular Cholesky factor."""
        return self._chol

    @property
    def dim(self) -> int:
        return self._values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values.copy()
        return self._values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, SpdMatrix):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    __hash__ = None

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim})"


def validate(values) -> SpdMatrix:
    """Check that ``values`` is finite, symmetric and positive definite."""
    if isinstance(values, SpdMatrix):
        return values
    return SpdMatrix(values)


def log_det(a: SpdMatrix) -> float:
    """Log-determinant, ``2 * sum(log(diag(chol(a))))``."""
    return a._log_det


def _eigh(a: np.ndarray):
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from None
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(u))):
        raise EigenFailure("eigendecomposition produced non-finite values")
    return w, u


def sym_function(a, fn) -> np.ndarray:
    """Apply a scalar function to the eigenvalues of a symmetric matrix."""
    w, u = _eigh(np.asarray(a, dtype=np.float64))
    out = (u * fn(w)) @ u.T
    return 0.5 * (out + out.T)


def sym_log(a: SpdMatrix) -> np.ndarray:
    """Principal matrix logarithm of an SPD matrix (symmetric result)."""
    w, u = _eigh(a.values)
    if np.any(w <= 0):
        raise EigenFailure("non-positive eigenvalue in an SPD matrix")
    out = (u * np.log(w)) @ u.T
    return 0.5 * (out + out.T)


def sym_exp(s) -> np.ndarray:
    """Matrix exponential of a symmetric matrix. Used to check :func:`sym_log`."""
    return sym_function(s, np.exp)


def congruence(a: SpdMatrix, x) -> SpdMatrix:
    """Return ``x @ a @ x.T``; ``x`` must be invertible."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (a.dim, a.dim):
        raise DimensionMismatch(f"transform shape {x.shape} does not match dim {a.dim}")
    if not np.all(np.isfinite(x)) or abs(np.linalg.det(x)) <= SINGULAR_DET:
        raise SingularTransform("transform is singular")
    out = x @ a.values @ x.T
    return SpdMatrix(0.5 * (out + out.T))


def inverse(a: SpdMatrix) -> SpdMatrix:
    # inv(A) = inv(L).T @ inv(L)
    eye = np.eye(a.dim)
    linv = np.linalg.solve(a.cholesky, eye)
    out = linv.T @ linv
    return SpdMatrix(0.5 * (out + out.T))


# -- matrix text format ----------------------------------------------------


def format_matrix(values, comments: Iterable[str] = ()) -> str:
    """Serialise a matrix: optional ``#`` comments, the row count, then rows.

    Entries are written with 17 significant digits so that a round trip is
    exact.
    """
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch("expected a 2-D array")
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(f"{a.shape[0]}\n")
    for row in a:
        buf.write(" ".join(f"{v:.17g}" for v in row))
        buf.write("\n")
    return buf.getvalue()


def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            yield line


def parse_matrix(text: str, ncols: int | None = None) -> np.ndarray:
    """Parse the matrix text format.

    The first non-comment line is the row count ``d``. Rows must have
    ``ncols`` entries (default ``d``, i.e. a square matrix).
    """
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("empty matrix text")
    try:
        d = int(lines[0])
    except ValueError:
        raise FormatError(f"bad dimension line {lines[0]!r}") from None
    if d <= 0:
        raise FormatError(f"dimension must be positive, got {d}")
    ncols = d if ncols is None else ncols
    rows = lines[1:]
    if len(rows) != d:
        raise FormatError(f"expected {d} rows, found {len(rows)}")
    try:
        a = np.array([[float(t) for t in r.split()] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"bad matrix entry: {exc}") from None
    if a.shape != (d, ncols):
        raise FormatError(f"expected {d}x{ncols} entries")
    return a


def read_comments(text: str) -> dict[str, str]:
    """Collect ``# key=value`` comment pairs."""
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    out[k] = v
    return out


def load_spd(path: str | os.PathLike) -> SpdMatrix:
    with open(path) as fh:
        text = fh.read()
    try:
        return SpdMatrix(parse_matrix(text))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def save_matrix(path: str | os.PathLike, values, comments: Iterable[str] = ()) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(values, comments))
