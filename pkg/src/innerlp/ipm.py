"""Infeasible Mehrotra predictor-corrector interior-point method.

Each step solves two least-squares problems ``min ||dw|| s.t. Ahat dw = f``
with the same row-scaled operator ``Ahat = diag(1/rho) A D``; one for the
affine direction and one for the corrector. The solves are either one of the
inner-iteration preconditioned Krylov methods or, as a baseline, the dense
LDLT factorization of ``A D^2 A^T`` with pivot dropping.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import IndefiniteMatrixError, InteriorError
from .krylov import KrylovConfig, Method, SolveReport, krylov_solve
from .ldlt import DEFAULT_DROP_TOL, ldlt_drop_factor, ldlt_drop_solve
from .mps import StandardFormLp
from .normal_eq import (
    ScaledSystem,
    build_scaled_system,
    corrector_rhs,
    predictor_rhs,
    recover_corrector,
    recover_predictor,
)
from .sparse import matvec, matvec_transpose, remove_zero_rows_cols

__all__ = [
    "Status",
    "Iterate",
    "IpmConfig",
    "StepRecord",
    "ConvergenceTrace",
    "IpmResult",
    "initial_point",
    "error_measure",
    "step_lengths",
    "choose_sigma",
    "centrality_backtrack",
    "adapt_inner_tolerance",
    "solve",
]

log = logging.getLogger(__name__)

LDLT = "ldlt"


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    ITERATION_LIMIT = "IterationLimit"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class Iterate:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    gamma: float = math.nan

    @property
    def mu(self):
        return float(self.x @ self.s) / self.x.size

    def copy(self):
        return Iterate(self.x.copy(), self.y.copy(), self.s.copy(), self.gamma)


@dataclass(frozen=True)
class IpmConfig:
    """Outer-loop parameters.

    ``solver`` is one of the Krylov method names or ``"ldlt"``. The Krylov
    tolerance in ``krylov`` is ignored; the adaptive ``eps_in`` replaces it.
    For the methods listed in ``unscaled_check`` a solve must also reach
    ``eps_in`` on the residual of the unscaled rows, measured against
    ``min(||f||, max(||b||, 1))``.
    """

    solver: str = Method.ABGMRES.value
    eps_out: float = 1e-8
    max_ipm_iter: int = 99
    eta: float = 0.9995
    phi: float = 1e-5
    sigma_cap: float = 0.208
    eps_in_init: float = 1e-6
    eps_in_bounds: tuple = (1e-14, 1e-4)
    eps_in_shrink_early: float = 0.75
    eps_in_shrink_late: float = 0.375
    eps_in_relax: float = 1.5
    late_phase_gamma: float = 1e-3
    backtrack_factor: float = 0.95
    backtrack_trials: int = 40
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    ldlt_drop_tol: float = DEFAULT_DROP_TOL
    ldlt_fallback_tol: Optional[float] = None
    init_tol: float = 1e-8
    unscaled_check: tuple = (Method.CGNE.value, Method.MRNE.value)
    cg_iter_factor: int = 20

    def __post_init__(self):
        if self.solver != LDLT:
            object.__setattr__(self, "solver", Method(self.solver).value)
        if not 0.9 <= self.eta < 1.0:
            raise ValueError(f"eta must lie in [0.9, 1), got {self.eta}")
        if not 0.0 <= self.sigma_cap < 1.0:
            raise ValueError("sigma_cap must lie in [0, 1)")
        lo, hi = self.eps_in_bounds
        if not 0.0 < lo <= self.eps_in_init <= hi:
            raise ValueError("eps_in_init must lie inside eps_in_bounds")
        if self.max_ipm_iter < 1 or self.eps_out <= 0:
            raise ValueError("max_ipm_iter and eps_out must be positive")

    @property
    def uses_ldlt(self):
        return self.solver == LDLT

    def krylov_config(self, tol, m=None):
        """Solver settings for one step. Without an explicit ``max_iter`` the
        limit is ``m``, widened by ``cg_iter_factor`` for CGNE and MRNE."""
        method = Method(self.solver)
        cfg = replace(self.krylov, method=method, tol=tol)
        if cfg.max_iter is None and m is not None and method is not Method.ABGMRES:
            cfg = replace(cfg, max_iter=max(1, self.cg_iter_factor * m))
        return cfg


@dataclass
class StepRecord:
    step: int
    mu: float
    gamma: float
    sigma: float
    alpha_p: float
    alpha_d: float
    eps_in: float
    predictor: SolveReport
    corrector: Optional[SolveReport]
    wall_ms: float
    shortcut: bool = False
    backtrack_failed: bool = False
    trial_alpha_p: float = math.nan
    trial_alpha_d: float = math.nan

    @property
    def krylov_iterations(self):
        return self.predictor.iterations + (self.corrector.iterations if self.corrector else 0)

    def csv_row(self):
        return {
            "step": self.step,
            "mu": self.mu,
            "gamma": self.gamma,
            "sigma": self.sigma,
            "alpha_p": self.alpha_p,
            "alpha_d": self.alpha_d,
            "eps_in": self.eps_in,
            "pred_iters": self.predictor.iterations,
            "corr_iters": self.corrector.iterations if self.corrector else 0,
            "wall_ms": self.wall_ms,
        }


TRACE_FIELDS = ("step", "mu", "gamma", "sigma", "alpha_p", "alpha_d", "eps_in", "pred_iters", "corr_iters", "wall_ms")


@dataclass
class ConvergenceTrace:
    steps: list = field(default_factory=list)
    final_gamma: float = math.nan
    message: str = ""

    def append(self, rec: StepRecord):
        self.steps.append(rec)

    def __len__(self):
        return len(self.steps)

    @property
    def krylov_iterations(self):
        return sum(r.krylov_iterations for r in self.steps)

    def write_csv(self, fh):
        w = csv.DictWriter(fh, fieldnames=TRACE_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.steps:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.csv_row().items()})


class IpmResult(NamedTuple):
    iterate: Iterate
    trace: ConvergenceTrace
    status: Status

    @property
    def iterations(self):
        return len(self.trace)

    @property
    def gamma(self):
        return self.trace.final_gamma


# --------------------------------------------------------------------------- pieces


def error_measure(it: Iterate, p: StandardFormLp) -> float:
    rp = p.b - matvec(p.A, it.x)
    rd = p.c - it.s - matvec_transpose(p.A, it.y)
    return max(
        it.mu,
        float(np.linalg.norm(rp)) / max(float(np.linalg.norm(p.b)), 1.0),
        float(np.linalg.norm(rd)) / max(float(np.linalg.norm(p.c)), 1.0),
    )


def _ratio(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


def step_lengths(x, dx, s, ds, eta):
    """``eta * min(1, ratio)`` for the primal and dual blocks."""
    return eta * min(1.0, _ratio(x, dx)), eta * min(1.0, _ratio(s, ds))


def choose_sigma(mu, mu_af, gamma, cfg: IpmConfig):
    if gamma > cfg.late_phase_gamma:
        return min(cfg.sigma_cap, (mu_af / mu) ** 2)
    return min(cfg.sigma_cap, 10.0 * gamma)


def _centred(x, dx, s, ds, ap, ad, phi):
    xn = x + ap * dx
    sn = s + ad * ds
    prod = xn * sn
    return bool(np.all(xn > 0) and np.all(sn > 0) and prod.min() >= phi * prod.sum() / x.size)


def centrality_backtrack(it: Iterate, dx, ds, alpha_p, alpha_d, phi, *, factor=0.95, trials=40):
    """Shrink both lengths together until the new products stay centred.

    Returns ``(alpha_p, alpha_d, failed)``; on failure the smallest trial pair
    is returned and ``failed`` is True.
    """
    ap, ad = alpha_p, alpha_d
    for _ in range(trials + 1):
        if _centred(it.x, dx, it.s, ds, ap, ad, phi):
            return ap, ad, False
        ap *= factor
        ad *= factor
    return ap / factor, ad / factor, True


def adapt_inner_tolerance(eps_in, gamma, last_solve_converged, cfg: IpmConfig):
    if not last_solve_converged:
        eps_in *= cfg.eps_in_relax
    if gamma <= 10.0:
        lg = math.log10(gamma) if gamma > 0 else -math.inf
        eps_in *= cfg.eps_in_shrink_late if lg <= -3.0 else cfg.eps_in_shrink_early
    lo, hi = cfg.eps_in_bounds
    return min(max(eps_in, lo), hi)


# --------------------------------------------------------------------------- inner solves


def _direct_solve(sys: ScaledSystem, f_scaled, drop_tol):
    """Dense ``A D^2 A^T`` LDLT solve on the row-scaled system."""
    Ah = sys.to_dense()
    fac = ldlt_drop_factor(Ah @ Ah.T, drop_tol)
    p = ldlt_drop_solve(fac, f_scaled)
    dw = Ah.T @ p
    fn = float(np.linalg.norm(f_scaled))
    res = float(np.linalg.norm(f_scaled - Ah @ dw)) / fn if fn > 0 else 0.0
    rep = SolveReport(LDLT, iterations=0, relative_residual=res, converged=bool(np.isfinite(res)))
    rep.dropped = fac.size - fac.kept.size
    return dw, p, rep


class _Solver:
    def __init__(self, cfg: IpmConfig, ref=None):
        self.cfg = cfg
        self.drop_tol = cfg.ldlt_drop_tol
        self.ref = ref

    def __call__(self, sys, f_scaled, eps_in):
        cfg = self.cfg
        if not cfg.uses_ldlt:
            w = sys.rho if cfg.solver in cfg.unscaled_check else None
            return krylov_solve(
                sys.operator, f_scaled, cfg.krylov_config(eps_in, sys.A.nrows), return_multiplier=True,
                weights=w, weight_ref=self.ref,
            )
        try:
            return _direct_solve(sys, f_scaled, self.drop_tol)
        except IndefiniteMatrixError:
            if cfg.ldlt_fallback_tol is None or self.drop_tol >= cfg.ldlt_fallback_tol:
                raise
            log.warning("LDLT pivot breakdown; raising drop tolerance to %g", cfg.ldlt_fallback_tol)
            self.drop_tol = cfg.ldlt_fallback_tol
            return _direct_solve(sys, f_scaled, self.drop_tol)


# --------------------------------------------------------------------------- driver


def initial_point(p: StandardFormLp, cfg: IpmConfig | None = None) -> Iterate:
    """Mehrotra-style start from two minimum-norm least-squares solves.

    ``xhat`` is the minimum-norm solution of ``A x = b`` and ``yhat`` the
    least-squares multiplier of ``A^T y ~ c``; both come from AB-GMRES with
    NE-SOR inner iterations on the row-normalized matrix. The shifts push
    ``x`` and ``s`` into the interior and balance their products.
    """
    cfg = cfg or IpmConfig()
    m, n = p.shape
    sys = build_scaled_system(p.A, np.ones(n), np.ones(n))
    kcfg = KrylovConfig(Method.ABGMRES, tol=cfg.init_tol, inner=cfg.krylov.inner)
    xhat, _ = krylov_solve(sys.operator, sys.scale_rhs(p.b), kcfg)
    _, q, _ = krylov_solve(sys.operator, sys.scale_rhs(matvec(p.A, p.c)), kcfg, return_multiplier=True)
    y = sys.unscale_multiplier(q)
    shat = p.c - matvec_transpose(p.A, y)

    dx = max(-1.5 * float(xhat.min()), 0.0)
    ds = max(-1.5 * float(shat.min()), 0.0)
    xt = xhat + dx
    st = shat + ds
    xs = float(xt @ st)
    dx2 = 0.5 * xs / max(float(st.sum()), np.finfo(float).tiny)
    ds2 = 0.5 * xs / max(float(xt.sum()), np.finfo(float).tiny)
    x = np.maximum(xt + dx2, 1.0)
    s = np.maximum(st + ds2, 1.0)
    it = Iterate(x, y, s)
    it.gamma = error_measure(it, p)
    return it


def _finite(*arrays):
    return all(np.all(np.isfinite(a)) for a in arrays)


def solve(
    p: StandardFormLp,
    cfg: IpmConfig | None = None,
    *,
    start: Iterate | None = None,
    callback: Callable[[dict], None] | None = None,
) -> IpmResult:
    """Run the predictor-corrector loop until ``Gamma <= eps_out``.

    Empty rows and columns are removed first and restored in the returned
    iterate. ``callback``, if given, receives a dict per step with the
    iterate before the step, the residuals and both directions.
    """
    cfg = cfg or IpmConfig()
    A, b, c, mapping = remove_zero_rows_cols(p.A, p.b, p.c)
    red = StandardFormLp(A, b, c, name=p.name) if not mapping.is_identity() else p
    trace = ConvergenceTrace()
    m, n = red.shape

    def result(it, status, msg=""):
        trace.message = msg
        full = Iterate(
            mapping.embed_x(it.x),
            mapping.embed_y(it.y),
            mapping.embed_x(it.s),
        )
        if not mapping.is_identity():
            full.s[mapping.removed_cols] = p.c[mapping.removed_cols]
        full.gamma = error_measure(full, p)
        trace.final_gamma = full.gamma
        return IpmResult(full, trace, status)

    if n == 0:
        return result(Iterate(np.zeros(0), np.zeros(m), np.zeros(0)), Status.OPTIMAL)
    if m == 0:
        x = np.zeros(n)
        status = Status.OPTIMAL if np.all(c >= 0) else Status.NUMERICAL_FAILURE
        return result(Iterate(x, np.zeros(0), c.copy()), status, "no constraints")

    solver = _Solver(cfg, max(float(np.linalg.norm(b)), 1.0))
    try:
        it = start.copy() if start is not None else initial_point(red, cfg)
    except (FloatingPointError, ValueError) as exc:
        return result(Iterate(np.ones(n), np.zeros(m), np.ones(n)), Status.NUMERICAL_FAILURE, str(exc))
    eps_in = cfg.eps_in_init
    last_ok = True
    bnorm = max(float(np.linalg.norm(red.b)), 1.0)
    cnorm = max(float(np.linalg.norm(red.c)), 1.0)

    for k in range(cfg.max_ipm_iter + 1):
        t0 = time.perf_counter()
        rp = red.b - matvec(red.A, it.x)
        rd = red.c - it.s - matvec_transpose(red.A, it.y)
        mu = it.mu
        it.gamma = gamma = max(mu, float(np.linalg.norm(rp)) / bnorm, float(np.linalg.norm(rd)) / cnorm)
        if not math.isfinite(gamma):
            return result(it, Status.NUMERICAL_FAILURE, "non-finite error measure")
        if gamma <= cfg.eps_out:
            return result(it, Status.OPTIMAL)
        if k == cfg.max_ipm_iter:
            return result(it, Status.ITERATION_LIMIT)
        if k > 0:
            eps_in = adapt_inner_tolerance(eps_in, gamma, last_ok, cfg)

        try:
            sys = build_scaled_system(red.A, it.x, it.s)
            f_af = predictor_rhs(sys, red.b, rd, it.x, it.s)
            dw_af, q_af, rep_af = solver(sys, f_af, eps_in)
            dx_af, ds_af = recover_predictor(sys, dw_af, rd, it.x)
            dy_af = sys.unscale_multiplier(q_af)
            if not _finite(dx_af, ds_af, dy_af):
                return result(it, Status.NUMERICAL_FAILURE, "non-finite predictor direction")
            raw_p, raw_d = _ratio(it.x, dx_af), _ratio(it.s, ds_af)
            shortcut = min(raw_p, raw_d) >= 1.0
            rep_cc = None
            if shortcut:
                sigma = 0.0
                dx, dy, ds = dx_af, dy_af, ds_af
                last_ok = rep_af.converged
            else:
                ap_af, ad_af = cfg.eta * min(1.0, raw_p), cfg.eta * min(1.0, raw_d)
                mu_af = float((it.x + ap_af * dx_af) @ (it.s + ad_af * ds_af)) / n
                sigma = choose_sigma(mu, mu_af, gamma, cfg)
                f_cc = corrector_rhs(sys, dx_af, ds_af, sigma, mu, it.s)
                dw_cc, q_cc, rep_cc = solver(sys, f_cc, eps_in)
                dx_cc, ds_cc = recover_corrector(sys, dw_cc, dx_af, ds_af, sigma, mu, it.s)
                dy_cc = sys.unscale_multiplier(q_cc)
                if not _finite(dx_cc, ds_cc, dy_cc):
                    return result(it, Status.NUMERICAL_FAILURE, "non-finite corrector direction")
                dx, dy, ds = dx_af + dx_cc, dy_af + dy_cc, ds_af + ds_cc
                last_ok = rep_af.converged and rep_cc.converged
        except (IndefiniteMatrixError, InteriorError, FloatingPointError, np.linalg.LinAlgError) as exc:
            return result(it, Status.NUMERICAL_FAILURE, str(exc))

        if callback is not None:
            callback({
                "step": k, "iterate": it.copy(), "r_p": rp, "r_d": rd, "sigma": sigma, "mu": mu,
                "predictor": (dx_af, dy_af, ds_af),
                "corrector": None if shortcut else (dx_cc, dy_cc, ds_cc),
                "direction": (dx, dy, ds),
            })

        tp, td = step_lengths(it.x, dx, it.s, ds, cfg.eta)
        ap, ad, failed = centrality_backtrack(
            it, dx, ds, tp, td, cfg.phi, factor=cfg.backtrack_factor, trials=cfg.backtrack_trials
        )
        if failed:
            log.info("step %d: centrality backtracking found no admissible pair", k)
        x_new = it.x + ap * dx
        s_new = it.s + ad * ds
        if not (_finite(x_new, s_new) and np.all(x_new > 0) and np.all(s_new > 0)):
            return result(it, Status.NUMERICAL_FAILURE, "iterate left the interior")
        it = Iterate(x_new, it.y + ad * dy, s_new)
        trace.append(StepRecord(
            k, mu, gamma, sigma, ap, ad, eps_in, rep_af, rep_cc,
            (time.perf_counter() - t0) * 1e3, shortcut, failed, tp, td,
        ))
    raise AssertionError("unreachable")
