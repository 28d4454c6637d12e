"""Dense LDLT with pivot dropping, the direct baseline for the normal equations.

Pivots at or below ``drop_tol`` are removed together with their row and
column, the remaining principal submatrix is factored, and the dropped
coordinates of the solution are set to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IndefiniteMatrixError

__all__ = ["LdltFactor", "ldlt_drop_factor", "ldlt_drop_solve", "DEFAULT_DROP_TOL", "FALLBACK_DROP_TOL"]

DEFAULT_DROP_TOL = 1e-16
FALLBACK_DROP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LdltFactor:
    L: np.ndarray  # unit lower triangular on the kept indices
    g: np.ndarray  # pivots on the kept indices
    kept: np.ndarray
    size: int
    drop_tol: float = DEFAULT_DROP_TOL

    @property
    def dropped(self):
        return np.setdiff1d(np.arange(self.size), self.kept)


def ldlt_drop_factor(M, drop_tol=DEFAULT_DROP_TOL) -> LdltFactor:
    """Right-looking LDLT in natural order; a pivot ``<= drop_tol`` is dropped.

    Dropping pivot ``k`` removes row and column ``k`` before the Schur update,
    so what is factored is exactly the principal submatrix on the kept set.
    A pivot below ``-drop_tol`` means ``M`` is not semidefinite.
    """
    M = np.array(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not drop_tol >= 0:
        raise ValueError("drop_tol must be nonnegative")
    n = M.shape[0]
    W = M.copy()
    Lfull = np.zeros((n, n))
    g = np.zeros(n)
    keep = np.zeros(n, dtype=bool)
    for k in range(n):
        piv = W[k, k]
        if not np.isfinite(piv):
            raise IndefiniteMatrixError(f"non-finite pivot at index {k}")
        if piv < -drop_tol:
            raise IndefiniteMatrixError(f"indefinite matrix: pivot {piv:.3e} at index {k}")
        if piv <= drop_tol:
            continue
        keep[k] = True
        g[k] = piv
        col = W[k + 1:, k] / piv
        Lfull[k + 1:, k] = col
        Lfull[k, k] = 1.0
        W[k + 1:, k + 1:] -= piv * np.outer(col, col)
    kept = np.flatnonzero(keep)
    L = Lfull[np.ix_(kept, kept)]
    return LdltFactor(L, g[kept], kept, n, float(drop_tol))


def _forward_unit(L, b):
    x = b.copy()
    for i in range(len(x)):
        x[i] -= L[i, :i] @ x[:i]
    return x


def _backward_unit_t(L, b):
    x = b.copy()
    for i in range(len(x) - 1, -1, -1):
        x[i] -= L[i + 1:, i] @ x[i + 1:]
    return x


def ldlt_drop_solve(fac: LdltFactor, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (fac.size,):
        raise DimensionError(f"right-hand side must have length {fac.size}, got {f.shape}")
    out = np.zeros(fac.size)
    if fac.kept.size:
        z = _forward_unit(fac.L, f[fac.kept])
        out[fac.kept] = _backward_unit_t(fac.L, z / fac.g)
    return out
