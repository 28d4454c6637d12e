"""Inner-iteration preconditioned Krylov solvers for ``min ||dw|| s.t. A dw = f``.

All three methods start from ``dw = 0`` so every iterate stays in the row
space of ``A`` and the limit is the minimum-norm solution. Each solver also
tracks an m-vector ``p`` with ``dw = A^T p``; the interior-point driver uses it
to recover the dual step.

``residual_history`` holds the relative 2-norm residuals of the recurrences.
``minimized_history`` holds the relative norm each method actually minimizes
over its Krylov space: the ``C``-weighted residual for MRNE and the plain
residual for AB-GMRES. CGNE minimizes an error norm that is not observable,
so its list stays empty.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .inner import InnerIterConfig, RowWorkspace, as_operator, ne_sor_apply, ne_ssor_apply

__all__ = [
    "Method",
    "KrylovConfig",
    "SolveReport",
    "cgne_solve",
    "mrne_solve",
    "ab_gmres_solve",
    "krylov_solve",
]


class Method(str, enum.Enum):
    CGNE = "cgne"
    MRNE = "mrne"
    ABGMRES = "abgmres"


@dataclass(frozen=True)
class KrylovConfig:
    method: Method = Method.ABGMRES
    tol: float = 1e-6
    max_iter: int | None = None  # None means m
    inner: InnerIterConfig = field(default_factory=InnerIterConfig)
    refresh_every: int = 50

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def iteration_limit(self, m):
        return max(1, m) if self.max_iter is None else self.max_iter


@dataclass
class SolveReport:
    method: str
    iterations: int = 0
    relative_residual: float = 0.0
    converged: bool = False
    breakdown: bool = False
    mv_count: int = 0
    inner_sweeps: int = 0
    residual_history: list = field(default_factory=list)
    minimized_history: list = field(default_factory=list)

    @property
    def mv_equivalents(self):
        # one forward sweep over all rows reads and updates every row once: 2 MV
        return self.mv_count + 2 * self.inner_sweeps


def _setup(A, f, cfg):
    op = as_operator(A)
    m, n = op.shape
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (m,):
        raise DimensionError(f"right-hand side must have length {m}, got {f.shape}")
    return op, f, m, n, RowWorkspace.for_operator(op)


class _Weighted:
    """Relative residual in a second, diagonally weighted norm."""

    def __init__(self, weights, f, ref=None):
        if weights is None:
            self.w = None
            return
        self.w = np.asarray(weights, dtype=np.float64)
        if self.w.shape != f.shape:
            raise DimensionError(f"weights must have length {f.size}")
        self.fnorm = float(np.linalg.norm(self.w * f)) or 1.0
        if ref is not None:
            self.fnorm = min(self.fnorm, float(ref))

    def ok(self, r, tol):
        return self.w is None or float(np.linalg.norm(self.w * r)) / self.fnorm <= tol


def _finish(report, op, mv0, ws, dw, p, f, fnorm, tol, return_multiplier, true_res=None, wt=None):
    r = None
    if true_res is None:
        r = f - op.matvec(dw)
        true_res = float(np.linalg.norm(r)) / fnorm
    report.relative_residual = true_res
    report.converged = bool(true_res <= tol)
    if report.converged and wt is not None and wt.w is not None:
        if r is None:
            r = f - op.matvec(dw)
        report.converged = wt.ok(r, tol)
    report.mv_count = op.mv_count - mv0
    report.inner_sweeps = ws.sweeps
    return (dw, p, report) if return_multiplier else (dw, report)


def _trivial(method, m, n, return_multiplier):
    report = SolveReport(method.value, converged=True, residual_history=[0.0])
    dw = np.zeros(n)
    return (dw, np.zeros(m), report) if return_multiplier else (dw, report)


def cgne_solve(A, f, cfg: KrylovConfig, *, return_multiplier=False, weights=None, weight_ref=None):
    """CGNE preconditioned by NE-SSOR inner iterations."""
    cfg.inner.require_odd()
    op, f, m, n, ws = _setup(A, f, cfg)
    fnorm = float(np.linalg.norm(f))
    if fnorm == 0.0:
        return _trivial(Method.CGNE, m, n, return_multiplier)
    mv0 = op.mv_count
    tol, limit = cfg.tol, cfg.iteration_limit(m)
    report = SolveReport(Method.CGNE.value, residual_history=[1.0])
    wt = _Weighted(weights, f, weight_ref)

    dw = np.zeros(n)
    p = np.zeros(m)
    g = f.copy()
    z, u = ne_ssor_apply(op, g, cfg.inner, ws)
    q, qm = u, z
    gamma = float(g @ z)
    best = (math.inf, dw, p)
    true_res = None
    for k in range(1, limit + 1):
        qq = float(q @ q)
        if not (gamma > 0.0 and qq > 0.0) or not math.isfinite(gamma / qq):
            report.breakdown = True
            break
        alpha = gamma / qq
        t = op.matvec(q)
        dw = dw + alpha * q
        p = p + alpha * qm
        g = g - alpha * t
        if k % cfg.refresh_every == 0:
            g = f - op.matvec(dw)
        res = float(np.linalg.norm(g)) / fnorm
        report.iterations = k
        report.residual_history.append(res)
        if res < best[0]:
            best = (res, dw, p)
        if res <= tol and wt.ok(g, tol):
            g = f - op.matvec(dw)
            true_res = float(np.linalg.norm(g)) / fnorm
            if true_res <= tol and wt.ok(g, tol):
                best = (true_res, dw, p)
                break
            true_res = None
        z, u = ne_ssor_apply(op, g, cfg.inner, ws)
        gamma_new = float(g @ z)
        beta = gamma_new / gamma
        gamma = gamma_new
        q = u + beta * q
        qm = z + beta * qm
    _, dw, p = best
    return _finish(report, op, mv0, ws, dw, p, f, fnorm, tol, return_multiplier, true_res, wt)


def mrne_solve(A, f, cfg: KrylovConfig, *, return_multiplier=False, weights=None, weight_ref=None):
    """MRNE preconditioned by NE-SSOR inner iterations.

    This is CG on ``A^T C A dw = A^T C f``; it minimizes ``||f - A dw||_C``
    over the preconditioned Krylov space.
    """
    cfg.inner.require_odd()
    op, f, m, n, ws = _setup(A, f, cfg)
    fnorm = float(np.linalg.norm(f))
    if fnorm == 0.0:
        return _trivial(Method.MRNE, m, n, return_multiplier)
    mv0 = op.mv_count
    tol, limit = cfg.tol, cfg.iteration_limit(m)
    report = SolveReport(Method.MRNE.value, residual_history=[1.0], minimized_history=[1.0])
    wt = _Weighted(weights, f, weight_ref)

    dw = np.zeros(n)
    p = np.zeros(m)
    g = f.copy()
    cg, q = ne_ssor_apply(op, g, cfg.inner, ws)  # cg = C g, q = A^T C g
    f_cnorm = math.sqrt(max(float(f @ cg), 0.0))
    d, dm = q, cg
    gamma = float(q @ q)
    best = (math.inf, dw, p)
    true_res = None
    for k in range(1, limit + 1):
        if not gamma > 0.0:
            report.breakdown = True
            break
        t = op.matvec(d)
        ct, v = ne_ssor_apply(op, t, cfg.inner, ws)
        denom = float(v @ d)
        if not denom > 0.0 or not math.isfinite(gamma / denom):
            report.breakdown = True
            break
        alpha = gamma / denom
        dw = dw + alpha * d
        p = p + alpha * dm
        g = g - alpha * t
        q = q - alpha * v
        cg = cg - alpha * ct
        if k % cfg.refresh_every == 0:
            g = f - op.matvec(dw)
            cg, q = ne_ssor_apply(op, g, cfg.inner, ws)
        res = float(np.linalg.norm(g)) / fnorm
        report.iterations = k
        report.residual_history.append(res)
        if f_cnorm > 0.0:
            report.minimized_history.append(math.sqrt(max(float(g @ cg), 0.0)) / f_cnorm)
        if res < best[0]:
            best = (res, dw, p)
        if res <= tol and wt.ok(g, tol):
            g = f - op.matvec(dw)
            true_res = float(np.linalg.norm(g)) / fnorm
            if true_res <= tol and wt.ok(g, tol):
                best = (true_res, dw, p)
                break
            true_res = None
            cg, q = ne_ssor_apply(op, g, cfg.inner, ws)
        gamma_new = float(q @ q)
        beta = gamma_new / gamma
        gamma = gamma_new
        d = q + beta * d
        dm = cg + beta * dm
    _, dw, p = best
    return _finish(report, op, mv0, ws, dw, p, f, fnorm, tol, return_multiplier, true_res, wt)


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    r = math.hypot(a, b)
    return a / r, b / r


def ab_gmres_solve(A, f, cfg: KrylovConfig, *, return_multiplier=False, weights=None, weight_ref=None):
    """AB-GMRES right-preconditioned by NE-SOR inner iterations, no restarts.

    The Hessenberg least-squares problem is reduced by Givens rotations as the
    basis grows, so the residual norm is available every iteration for free.
    """
    op, f, m, n, ws = _setup(A, f, cfg)
    beta = float(np.linalg.norm(f))
    if beta == 0.0:
        return _trivial(Method.ABGMRES, m, n, return_multiplier)
    mv0 = op.mv_count
    tol, limit = cfg.tol, cfg.iteration_limit(m)
    report = SolveReport(Method.ABGMRES.value, residual_history=[1.0], minimized_history=[1.0])
    wt = _Weighted(weights, f, weight_ref)

    V = np.zeros((limit + 1, m))  # rows are basis vectors
    R = np.zeros((limit + 1, limit))
    cs = np.zeros(limit)
    sn = np.zeros(limit)
    rhs = np.zeros(limit + 1)
    rhs[0] = beta
    V[0] = f / beta

    def assemble(k):
        y = np.zeros(k)
        for i in range(k - 1, -1, -1):
            y[i] = (rhs[i] - R[i, i + 1:k] @ y[i + 1:k]) / R[i, i]
        qk = y @ V[:k]
        return ne_sor_apply(op, qk, cfg.inner, ws, return_multiplier=True)

    k = 0
    solution = None
    true_res = None
    while k < limit:
        zk = ne_sor_apply(op, V[k], cfg.inner, ws)
        u = op.matvec(zk)
        unorm = float(np.linalg.norm(u))
        for i in range(k + 1):
            h = float(u @ V[i])
            R[i, k] = h
            u -= h * V[i]
        hnext = float(np.linalg.norm(u))
        for i in range(k):
            a, b = R[i, k], R[i + 1, k]
            R[i, k] = cs[i] * a + sn[i] * b
            R[i + 1, k] = -sn[i] * a + cs[i] * b
        cs[k], sn[k] = _givens(R[k, k], hnext)
        R[k, k] = cs[k] * R[k, k] + sn[k] * hnext
        rhs[k + 1] = -sn[k] * rhs[k]
        rhs[k] = cs[k] * rhs[k]
        k += 1
        res = abs(rhs[k]) / beta
        report.iterations = k
        report.residual_history.append(res)
        report.minimized_history.append(res)
        happy = hnext <= 1e-14 * max(unorm, np.finfo(float).tiny) or R[k - 1, k - 1] == 0.0
        if R[k - 1, k - 1] == 0.0:
            report.breakdown = True
            k -= 1
            break
        if not happy:
            V[k] = u / hnext
        if res <= tol or happy or k % cfg.refresh_every == 0:
            solution = assemble(k)
            r = f - op.matvec(solution[0])
            true_res = float(np.linalg.norm(r)) / beta
            if (true_res <= tol and wt.ok(r, tol)) or happy:
                break
            solution = None
    if solution is None:
        solution = assemble(k) if k > 0 else (np.zeros(n), np.zeros(m))
        true_res = None
    dw, p = solution
    return _finish(report, op, mv0, ws, dw, p, f, beta, tol, return_multiplier, true_res, wt)


_SOLVERS = {
    Method.CGNE: cgne_solve,
    Method.MRNE: mrne_solve,
    Method.ABGMRES: ab_gmres_solve,
}


def krylov_solve(A, f, cfg: KrylovConfig, *, return_multiplier=False, weights=None, weight_ref=None):
    """Dispatch on ``cfg.method``.

    With ``weights`` (length m) a solve only counts as converged when the
    weighted residual ``||W (f - A dw)|| / ||W f||`` is also below ``tol``.
    """
    return _SOLVERS[cfg.method](
        A, f, cfg, return_multiplier=return_multiplier, weights=weights, weight_ref=weight_ref
    )
