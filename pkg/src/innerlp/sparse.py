"""Row-major sparse storage and the kernels built on it.

``CsrMatrix`` is the only matrix format in the package. Column access is
always done through :func:`matvec_transpose`, which walks rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionError, InfeasibleError

__all__ = [
    "CsrMatrix",
    "RowOperator",
    "matvec",
    "matvec_transpose",
    "row_dot",
    "row_axpy",
    "row_norms",
    "remove_zero_rows_cols",
    "ZeroRowColMap",
    "write_matrix_market",
    "read_matrix_market",
]


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """Canonical CSR matrix: sorted unique columns per row, no stored zeros.

    Build instances with :meth:`from_coo` or :meth:`from_dense`; the raw
    constructor validates but does not canonicalize.
    """

    nrows: int
    ncols: int
    row_starts: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rs = np.ascontiguousarray(self.row_starts, dtype=np.int64)
        ci = np.ascontiguousarray(self.col_indices, dtype=np.int64)
        va = np.ascontiguousarray(self.values, dtype=np.float64)
        if rs.shape != (self.nrows + 1,):
            raise DimensionError("row_starts must have length nrows + 1")
        if rs[0] != 0 or rs[-1] != va.size or ci.size != va.size:
            raise DimensionError("row_starts inconsistent with values")
        if np.any(np.diff(rs) < 0):
            raise DimensionError("row_starts must be nondecreasing")
        if ci.size and (ci.min() < 0 or ci.max() >= self.ncols):
            raise DimensionError("column index out of range")
        for arr in (rs, ci, va):
            arr.setflags(write=False)
        object.__setattr__(self, "row_starts", rs)
        object.__setattr__(self, "col_indices", ci)
        object.__setattr__(self, "values", va)

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals):
        """Assemble from triplets. Duplicates are summed, exact zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.size == cols.size == vals.size):
            raise DimensionError("triplet arrays differ in length")
        if rows.size and (rows.min() < 0 or rows.max() >= nrows):
            raise DimensionError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= ncols):
            raise DimensionError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            key = rows * ncols + cols
            first = np.concatenate(([True], key[1:] != key[:-1]))
            starts = np.flatnonzero(first)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
        row_starts = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=nrows), out=row_starts[1:])
        return cls(int(nrows), int(ncols), row_starts, cols, vals)

    @classmethod
    def from_dense(cls, dense):
        dense = np.atleast_2d(np.asarray(dense, dtype=np.float64))
        r, c = np.nonzero(dense)
        return cls.from_coo(dense.shape[0], dense.shape[1], r, c, dense[r, c])

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls.from_coo(n, n, idx, idx, np.ones(n))

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.values.size)

    def to_dense(self):
        out = np.zeros(self.shape)
        rows = np.repeat(np.arange(self.nrows), np.diff(self.row_starts))
        out[rows, self.col_indices] = self.values
        return out

    def to_coo(self):
        rows = np.repeat(np.arange(self.nrows), np.diff(self.row_starts))
        return rows, self.col_indices.copy(), self.values.copy()

    def row(self, i):
        """Column indices and values of row ``i`` (read-only views)."""
        _check_row(self, i)
        lo, hi = self.row_starts[i], self.row_starts[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def canonical(self):
        return CsrMatrix.from_coo(self.nrows, self.ncols, *self.to_coo())

    def select(self, rows=None, cols=None):
        """Submatrix on the given (sorted) row and column index arrays."""
        r, c, v = self.to_coo()
        rows = np.arange(self.nrows) if rows is None else np.asarray(rows, dtype=np.int64)
        cols = np.arange(self.ncols) if cols is None else np.asarray(cols, dtype=np.int64)
        rmap = np.full(self.nrows, -1, dtype=np.int64)
        rmap[rows] = np.arange(rows.size)
        cmap = np.full(self.ncols, -1, dtype=np.int64)
        cmap[cols] = np.arange(cols.size)
        keep = (rmap[r] >= 0) & (cmap[c] >= 0)
        return CsrMatrix.from_coo(rows.size, cols.size, rmap[r[keep]], cmap[c[keep]], v[keep])

    def __matmul__(self, x):
        return matvec(self, x)


def _check_row(A, i):
    if not 0 <= i < A.nrows:
        raise IndexError(f"row {i} out of range for {A.nrows} rows")


def _vec(x, n, what):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != n:
        raise DimensionError(f"{what}: expected length {n}, got shape {x.shape}")
    return x


_ONES_CACHE: dict[int, np.ndarray] = {}


def _ones(n):
    v = _ONES_CACHE.get(n)
    if v is None:
        v = np.ones(n)
        v.setflags(write=False)
        _ONES_CACHE[n] = v
    return v


def matvec(A: CsrMatrix, x) -> np.ndarray:
    x = _vec(x, A.ncols, "matvec")
    return _kernels.csr_matvec(
        A.row_starts, A.col_indices, A.values, _ones(A.ncols), _ones(A.nrows), x
    )


def matvec_transpose(A: CsrMatrix, y) -> np.ndarray:
    y = _vec(y, A.nrows, "matvec_transpose")
    return _kernels.csr_rmatvec(
        A.row_starts, A.col_indices, A.values, _ones(A.ncols), _ones(A.nrows), y, A.ncols
    )


def row_dot(A: CsrMatrix, i: int, x) -> float:
    x = _vec(x, A.ncols, "row_dot")
    cols, vals = A.row(i)
    return float(vals @ x[cols])


def row_axpy(A: CsrMatrix, i: int, d: float, x: np.ndarray) -> None:
    """In place ``x += d * A[i, :]``."""
    _vec(x, A.ncols, "row_axpy")
    cols, vals = A.row(i)
    x[cols] += d * vals


def row_norms(A: CsrMatrix) -> np.ndarray:
    return np.sqrt(
        _kernels.csr_row_sqnorms(
            A.row_starts, A.col_indices, A.values, _ones(A.ncols), _ones(A.nrows)
        )
    )


@dataclass
class RowOperator:
    """The implicit operator ``diag(row_scale) @ A @ diag(col_scale)``.

    ``sq_row_norms`` are the squared row norms of the scaled operator as used
    by the NE-(S)SOR sweeps; rows with a zero entry there are skipped.
    ``mv_count`` counts explicit forward and transpose applications.
    """

    A: CsrMatrix
    col_scale: np.ndarray
    row_scale: np.ndarray
    sq_row_norms: np.ndarray
    mv_count: int = field(default=0)

    @classmethod
    def from_matrix(cls, A: CsrMatrix, col_scale=None, row_scale=None):
        cs = _ones(A.ncols) if col_scale is None else _vec(col_scale, A.ncols, "col_scale")
        rs = _ones(A.nrows) if row_scale is None else _vec(row_scale, A.nrows, "row_scale")
        sq = _kernels.csr_row_sqnorms(A.row_starts, A.col_indices, A.values, cs, rs)
        return cls(A, cs, rs, sq)

    @property
    def shape(self):
        return self.A.shape

    def matvec(self, x):
        self.mv_count += 1
        A = self.A
        return _kernels.csr_matvec(
            A.row_starts, A.col_indices, A.values, self.col_scale, self.row_scale,
            _vec(x, A.ncols, "matvec"),
        )

    def rmatvec(self, y):
        self.mv_count += 1
        A = self.A
        return _kernels.csr_rmatvec(
            A.row_starts, A.col_indices, A.values, self.col_scale, self.row_scale,
            _vec(y, A.nrows, "rmatvec"), A.ncols,
        )

    def row_scaled(self, extra):
        """Same operator with rows further multiplied by ``extra``."""
        extra = _vec(extra, self.A.nrows, "row scale")
        return RowOperator(
            self.A, self.col_scale, self.row_scale * extra, self.sq_row_norms * extra**2
        )

    def to_dense(self):
        return self.row_scale[:, None] * self.A.to_dense() * self.col_scale[None, :]


@dataclass(frozen=True)
class ZeroRowColMap:
    """Kept row/column indices of the original problem."""

    nrows: int
    ncols: int
    kept_rows: np.ndarray
    kept_cols: np.ndarray

    @property
    def removed_rows(self):
        return np.setdiff1d(np.arange(self.nrows), self.kept_rows)

    @property
    def removed_cols(self):
        return np.setdiff1d(np.arange(self.ncols), self.kept_cols)

    def is_identity(self):
        return self.kept_rows.size == self.nrows and self.kept_cols.size == self.ncols

    def embed_x(self, x_reduced, fill=0.0):
        x = np.full(self.ncols, fill, dtype=float)
        x[self.kept_cols] = x_reduced
        return x

    def embed_y(self, y_reduced, fill=0.0):
        y = np.full(self.nrows, fill, dtype=float)
        y[self.kept_rows] = y_reduced
        return y


def remove_zero_rows_cols(A: CsrMatrix, b, c, tol=0.0):
    """Drop empty rows and columns of ``A`` along with their ``b``/``c`` entries.

    A removed zero row whose right-hand side exceeds ``tol`` in magnitude makes
    the problem trivially infeasible.
    """
    b = _vec(b, A.nrows, "b")
    c = _vec(c, A.ncols, "c")
    row_counts = np.diff(A.row_starts)
    col_counts = np.bincount(A.col_indices, minlength=A.ncols)
    zero_rows = np.flatnonzero(row_counts == 0)
    bad = zero_rows[np.abs(b[zero_rows]) > tol]
    if bad.size:
        raise InfeasibleError(
            f"zero row {int(bad[0])} has nonzero right-hand side {float(b[bad[0]])!r}: trivially infeasible"
        )
    kept_rows = np.flatnonzero(row_counts > 0)
    kept_cols = np.flatnonzero(col_counts > 0)
    mapping = ZeroRowColMap(A.nrows, A.ncols, kept_rows, kept_cols)
    if mapping.is_identity():
        return A, b.copy(), c.copy(), mapping
    return A.select(kept_rows, kept_cols), b[kept_rows], c[kept_cols], mapping


def write_matrix_market(A: CsrMatrix, fh) -> None:
    """Coordinate real general Matrix Market text, 1-based indices."""
    r, c, v = A.to_coo()
    fh.write("%%MatrixMarket matrix coordinate real general\n")
    fh.write(f"{A.nrows} {A.ncols} {A.nnz}\n")
    for i, j, x in zip(r, c, v):
        fh.write(f"{i + 1} {j + 1} {float(x)!r}\n")


def read_matrix_market(fh) -> CsrMatrix:
    lines = (ln for ln in fh if ln.strip() and not ln.startswith("%"))
    nrows, ncols, nnz = (int(t) for t in next(lines).split())
    r = np.empty(nnz, dtype=np.int64)
    c = np.empty(nnz, dtype=np.int64)
    v = np.empty(nnz)
    for k in range(nnz):
        i, j, x = next(lines).split()
        r[k], c[k], v[k] = int(i) - 1, int(j) - 1, float(x)
    return CsrMatrix.from_coo(nrows, ncols, r, c, v)
