"""Per-step scaled least-squares system of the interior-point method.

At an interior point ``(x, s)`` the Newton step reduces to
``min ||dw|| s.t. A D dw = f`` with ``D = diag(sqrt(x / s))``. Rows are then
divided by their norms ``rho`` so the operator seen by the Krylov solvers,
``diag(1/rho) A D``, has unit rows. ``dw`` itself is unaffected by the row
scaling; only right-hand sides and the dual multiplier are.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError, InteriorError
from .sparse import CsrMatrix, RowOperator, matvec

__all__ = [
    "ScaledSystem",
    "build_scaled_system",
    "predictor_rhs",
    "corrector_rhs",
    "recover_predictor",
    "recover_corrector",
]

RATIO_FLOOR = 1e-128
RATIO_CEIL = 1e128


@dataclass(frozen=True, eq=False)
class ScaledSystem:
    A: CsrMatrix
    d: np.ndarray
    rho: np.ndarray
    operator: RowOperator
    clamped: int = 0

    @property
    def zero_rows(self):
        return np.flatnonzero(self.rho == 0.0)

    def scale_rhs(self, f):
        return np.divide(f, self.rho, out=np.zeros_like(f), where=self.rho > 0)

    def unscale_multiplier(self, p):
        """``dy`` with ``A^T dy = D^{-1} dw`` from the scaled multiplier ``p``."""
        return np.divide(p, self.rho, out=np.zeros_like(p), where=self.rho > 0)

    def apply(self, v):
        """``diag(1/rho) A D v`` without forming any product matrix."""
        return self.operator.matvec(v)

    def to_dense(self):
        return self.operator.to_dense()


def _vec(v, n, what):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise DimensionError(f"{what}: expected length {n}, got {v.shape}")
    return v


def build_scaled_system(A: CsrMatrix, x, s) -> ScaledSystem:
    n = A.ncols
    x = _vec(x, n, "x")
    s = _vec(s, n, "s")
    if not (np.all(x > 0) and np.all(s > 0)):
        raise InteriorError("x and s must be strictly positive")
    ratio = x / s
    clamped = int(np.count_nonzero((ratio < RATIO_FLOOR) | (ratio > RATIO_CEIL)))
    d = np.sqrt(np.clip(ratio, RATIO_FLOOR, RATIO_CEIL))
    ones = np.ones(A.nrows)
    rho = np.sqrt(_kernels.csr_row_sqnorms(A.row_starts, A.col_indices, A.values, d, ones))
    inv_rho = np.divide(1.0, rho, out=np.zeros_like(rho), where=rho > 0)
    # unit rows by construction, so the sweeps never need the norms recomputed
    sq = (rho > 0).astype(np.float64)
    op = RowOperator(A, d, inv_rho, sq)
    return ScaledSystem(A, d, rho, op, clamped)


def predictor_rhs(sys: ScaledSystem, b, r_d, x, s, *, scaled=True):
    """``b + A S^{-1} X r_d``, row-scaled unless ``scaled=False``."""
    m, n = sys.A.shape
    b = _vec(b, m, "b")
    r_d = _vec(r_d, n, "r_d")
    _vec(x, n, "x")
    _vec(s, n, "s")
    f = b + matvec(sys.A, sys.d**2 * r_d)
    return sys.scale_rhs(f) if scaled else f


def corrector_rhs(sys: ScaledSystem, dx_af, ds_af, sigma, mu, s, *, scaled=True):
    """``A S^{-1} (dX_af dS_af e - sigma mu e)``, row-scaled unless ``scaled=False``."""
    n = sys.A.ncols
    dx_af = _vec(dx_af, n, "dx_af")
    ds_af = _vec(ds_af, n, "ds_af")
    s = _vec(s, n, "s")
    f = matvec(sys.A, (dx_af * ds_af - sigma * mu) / s)
    return sys.scale_rhs(f) if scaled else f


def recover_predictor(sys: ScaledSystem, dw_af, r_d, x):
    n = sys.A.ncols
    dw_af = _vec(dw_af, n, "dw_af")
    ds = _vec(r_d, n, "r_d") - dw_af / sys.d
    dx = -sys.d**2 * ds - _vec(x, n, "x")
    return dx, ds


def recover_corrector(sys: ScaledSystem, dw_cc, dx_af, ds_af, sigma, mu, s):
    n = sys.A.ncols
    ds = -_vec(dw_cc, n, "dw_cc") / sys.d
    s = _vec(s, n, "s")
    dx = -sys.d**2 * ds - _vec(dx_af, n, "dx_af") * _vec(ds_af, n, "ds_af") / s + sigma * mu / s
    return dx, ds
