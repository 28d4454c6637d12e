"""NE-SOR and NE-SSOR inner iterations.

Both run a fixed number of row-action sweeps on ``A A^T z = g`` with
``u = A^T z`` starting from zero. They are never iterated to convergence;
the Krylov solvers use them as the implicit preconditioners
``C = sum_{i<ell} H^i M^{-1}`` and ``B = A^T C``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError
from .sparse import CsrMatrix, RowOperator

__all__ = ["InnerIterConfig", "RowWorkspace", "ne_sor_apply", "ne_ssor_apply", "as_operator"]


@dataclass(frozen=True)
class InnerIterConfig:
    omega: float = 1.0
    ell: int = 5

    def __post_init__(self):
        if not 0.0 < self.omega < 2.0:
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise ValueError(f"ell must be a positive integer, got {self.ell}")

    def require_odd(self):
        """CGNE/MRNE need an SPD ``C``, which NE-SSOR only guarantees for odd ``ell``."""
        if self.ell % 2 == 0:
            raise ValueError(f"NE-SSOR preconditioning for CGNE/MRNE needs odd ell, got {self.ell}")


@dataclass
class RowWorkspace:
    """Squared row norms used by the sweeps plus a zero-row mask.

    The sweeps allocate their own output vectors, so one workspace may be
    reused across applies but not shared between concurrent ones.
    """

    sq_norms: np.ndarray
    sweeps: int = 0

    @classmethod
    def for_operator(cls, op: RowOperator):
        return cls(np.ascontiguousarray(op.sq_row_norms, dtype=np.float64))

    @property
    def zero_rows(self):
        return np.flatnonzero(self.sq_norms == 0.0)


def as_operator(A) -> RowOperator:
    if isinstance(A, RowOperator):
        return A
    if isinstance(A, CsrMatrix):
        return RowOperator.from_matrix(A)
    return RowOperator.from_matrix(CsrMatrix.from_dense(A))


def _prepare(A, g, ws):
    op = as_operator(A)
    m, _ = op.shape
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (m,):
        raise DimensionError(f"right-hand side must have length {m}, got {g.shape}")
    if ws is None:
        ws = RowWorkspace.for_operator(op)
    elif ws.sq_norms.shape != (m,):
        raise DimensionError("workspace does not match the operator")
    return op, g, ws


def ne_sor_apply(A, g, cfg: InnerIterConfig, ws: RowWorkspace | None = None, *, return_multiplier=False):
    """``ell`` forward NE-SOR sweeps from ``z = 0``; returns ``z = B g`` (length n).

    With ``return_multiplier`` the accumulated row multipliers ``p`` (length m,
    ``z = A^T p``) are returned as a second value.
    """
    op, g, ws = _prepare(A, g, ws)
    M = op.A
    z, p = _kernels.ne_sor_sweeps(
        M.row_starts, M.col_indices, M.values, op.col_scale, op.row_scale,
        ws.sq_norms, g, float(cfg.omega), int(cfg.ell), M.ncols,
    )
    ws.sweeps += cfg.ell
    return (z, p) if return_multiplier else z


def ne_ssor_apply(A, g, cfg: InnerIterConfig, ws: RowWorkspace | None = None):
    """``ell`` symmetric NE-SSOR sweeps from zero; returns ``(z, u)`` with
    ``z = C g`` (length m) and ``u = A^T z`` (length n) kept incrementally."""
    op, g, ws = _prepare(A, g, ws)
    M = op.A
    z, u = _kernels.ne_ssor_sweeps(
        M.row_starts, M.col_indices, M.values, op.col_scale, op.row_scale,
        ws.sq_norms, g, float(cfg.omega), int(cfg.ell), M.ncols,
    )
    ws.sweeps += 2 * cfg.ell
    return z, u
