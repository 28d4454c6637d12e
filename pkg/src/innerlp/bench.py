"""Benchmark harness: random rank-deficient problems, suite runs and profiles.

Records are flat rows with the columns

    problem,m,n,solver,status,ipm_iters,krylov_iters,wall_ms,gamma,objective

and performance profiles are ``solver,tau,pi`` rows of the Dolan-More step
function ``pi_s(tau) = P(log2 r_ps <= tau)``.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import statistics
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from .errors import InnerLPError, MpsParseError
from .ipm import IpmConfig, IpmResult, Status, solve
from .mps import LpProblem, RowType, StandardFormLp, read_mps, to_standard_form
from .sparse import CsrMatrix

log = logging.getLogger(__name__)

__all__ = [
    "GenSpec",
    "generate_problem",
    "numeric_rank_cond",
    "standard_to_lp",
    "BenchRecord",
    "BENCH_FIELDS",
    "PARSE_ERROR",
    "write_records",
    "read_records",
    "run_suite",
    "ProfilePoint",
    "PROFILE_FIELDS",
    "performance_profile",
    "write_profile",
]

BENCH_FIELDS = ("problem", "m", "n", "solver", "status", "ipm_iters", "krylov_iters", "wall_ms", "gamma", "objective")
PROFILE_FIELDS = ("solver", "tau", "pi")
PARSE_ERROR = "ParseError"
RANK_RTOL = 1e-10


# --------------------------------------------------------------------------
# problem generation


@dataclass(frozen=True)
class GenSpec:
    """Shape, rank, condition number and density of a generated problem.

    ``zero_fraction`` is the probability that an entry of the generating
    primal point is zero.
    """

    m: int
    n: int
    rank: int
    cond: float = 1e2
    density: float = 1.0
    seed: int = 0
    zero_fraction: float = 0.5

    def __post_init__(self):
        if not 1 <= self.rank <= self.m <= self.n:
            raise ValueError(f"need 1 <= rank <= m <= n, got rank={self.rank}, m={self.m}, n={self.n}")
        if not self.cond >= 1.0 or not math.isfinite(self.cond):
            raise ValueError(f"cond must be a finite number >= 1, got {self.cond}")
        if not 0.0 < self.density <= 1.0:
            raise ValueError(f"density must lie in (0, 1], got {self.density}")
        if not 0.0 <= self.zero_fraction < 1.0:
            raise ValueError("zero_fraction must lie in [0, 1)")

    @property
    def label(self):
        return f"gen{self.m}x{self.n}-r{self.rank}-k{self.cond:.0e}-d{self.density:g}-s{self.seed}"


def _haar(rng, k):
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def _rotate(M, i, j, theta, axis):
    c, s = math.cos(theta), math.sin(theta)
    if axis == 0:
        a, b = M[i].copy(), M[j]
        M[i] = c * a - s * b
        M[j] = s * a + c * b
    else:
        a, b = M[:, i].copy(), M[:, j]
        M[:, i] = c * a - s * b
        M[:, j] = s * a + c * b


def _profile_factor(rows, n, sv, density, rng):
    """``rows x n`` matrix whose singular values are ``sv`` (``len(sv) == rows``)."""
    r = int(np.count_nonzero(sv))
    sv = sv[:r]
    if density >= 1.0:
        return (_haar(rng, rows)[:, :r] * sv) @ _haar(rng, n)[:, :r].T
    # Start from the singular values on a permuted diagonal and apply random
    # plane rotations to rows and columns. Each rotation is orthogonal, so
    # the singular values are kept while fill grows.
    M = np.zeros((rows, n))
    M[rng.permutation(rows)[:r], rng.permutation(n)[:r]] = sv
    target = density * rows * n
    while np.count_nonzero(M) < target:
        axis = int(rng.integers(2))
        k = M.shape[axis]
        i, j = rng.choice(k, size=2, replace=False)
        _rotate(M, i, j, rng.uniform(0.0, 2.0 * math.pi), axis)
    return M


def _low_rank_matrix(spec: GenSpec, rng):
    r = spec.rank
    sv = np.zeros(spec.m)
    sv[:r] = np.logspace(0.0, -math.log10(spec.cond), r) if r > 1 else 1.0
    return _profile_factor(spec.m, spec.n, sv, spec.density, rng)


def numeric_rank_cond(A, rtol=RANK_RTOL):
    """Numeric rank (singular values above ``rtol * sigma_1``) and
    ``sigma_1 / sigma_r`` over those values."""
    dense = A.to_dense() if isinstance(A, CsrMatrix) else np.asarray(A, dtype=np.float64)
    sv = np.linalg.svd(dense, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0, math.inf
    rank = int(np.count_nonzero(sv > rtol * sv[0]))
    return rank, float(sv[0] / sv[rank - 1])


def generate_problem(spec: GenSpec) -> StandardFormLp:
    """Consistent standard-form LP with a prescribed rank and condition number.

    ``x`` has uniform entries on a random support, ``b = A x`` and ``c`` is
    uniform and strictly positive, so the problem is feasible and bounded.
    The achieved numeric rank and condition number are appended to the name.
    """
    rng = np.random.default_rng(spec.seed)
    M = _low_rank_matrix(spec, rng)
    A = CsrMatrix.from_dense(M)
    x = rng.uniform(0.0, 1.0, spec.n)
    x[rng.random(spec.n) < spec.zero_fraction] = 0.0
    b = M @ x
    c = 1.0 - rng.random(spec.n)
    rank, cond = numeric_rank_cond(M)
    return StandardFormLp(A, b, c, name=f"{spec.label}-R{rank}-K{cond:.2e}")


def standard_to_lp(p: StandardFormLp) -> LpProblem:
    """The same LP as equality rows over nonnegative columns, ready to write as MPS."""
    m, n = p.shape
    name = p.name.replace(" ", "_") or "GENERATED"
    return LpProblem(p.A, p.b.copy(), p.c.copy(), [RowType.E] * m, name=name)


# --------------------------------------------------------------------------
# records


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class BenchRecord:
    problem: str
    m: int
    n: int
    solver: str
    status: str
    ipm_iters: int
    krylov_iters: int
    wall_ms: float
    gamma: float
    objective: float

    @property
    def solved(self):
        return self.status == Status.OPTIMAL.value

    def row(self):
        return [_fmt(getattr(self, f)) for f in BENCH_FIELDS]

    @classmethod
    def from_row(cls, row: Mapping[str, str]):
        conv = {f.name: f.type for f in fields(cls)}
        kw = {}
        for name in BENCH_FIELDS:
            t = conv[name]
            raw = row[name]
            kw[name] = int(raw) if t == "int" else float(raw) if t == "float" else raw
        return cls(**kw)


def write_records(records: Iterable[BenchRecord], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(BENCH_FIELDS)
    for r in records:
        w.writerow(r.row())


def read_records(source) -> list:
    """Parse bench CSV from a path or an open text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_records(fh)
    reader = csv.DictReader(source)
    if reader.fieldnames is None or tuple(reader.fieldnames) != BENCH_FIELDS:
        raise ValueError(f"bench CSV must have header {','.join(BENCH_FIELDS)}")
    return [BenchRecord.from_row(row) for row in reader]


# --------------------------------------------------------------------------
# suite runner

ProblemSource = Union[str, os.PathLike, StandardFormLp, GenSpec]
SolverFn = Callable[[StandardFormLp], IpmResult]


def solver_id(cfg: IpmConfig) -> str:
    if cfg.uses_ldlt and cfg.ldlt_fallback_tol is not None:
        return f"ldlt+fallback{cfg.ldlt_fallback_tol:g}"
    return cfg.solver


def _load(src: ProblemSource) -> StandardFormLp:
    if isinstance(src, StandardFormLp):
        return src
    if isinstance(src, GenSpec):
        return generate_problem(src)
    return to_standard_form(read_mps(src))


def _source_name(src: ProblemSource) -> str:
    if isinstance(src, StandardFormLp):
        return src.name
    if isinstance(src, GenSpec):
        return src.label
    return os.path.basename(os.fspath(src)).split(".")[0]


def _run_one(prob: StandardFormLp, sid: str, how: Union[IpmConfig, SolverFn], repeat: int) -> BenchRecord:
    m, n = prob.shape
    times = []
    res = None
    try:
        for _ in range(repeat):
            t0 = time.perf_counter()
            res = how(prob) if callable(how) else solve(prob, how)
            times.append((time.perf_counter() - t0) * 1e3)
    except Exception as exc:  # a failing solver is a result, never a reason to stop the suite
        log.warning("%s on %s failed: %s", sid, prob.name, exc)
        return BenchRecord(prob.name, m, n, sid, Status.NUMERICAL_FAILURE.value, 0, 0,
                           statistics.median(times) if times else math.nan, math.nan, math.nan)
    status = Status(res.status).value
    obj = prob.original_objective(res.iterate.x) if status == Status.OPTIMAL.value else math.nan
    return BenchRecord(
        prob.name, m, n, sid, status, res.iterations, res.trace.krylov_iterations,
        statistics.median(times), float(res.gamma), float(obj),
    )


def _run_problem(src: ProblemSource, solvers: list, repeat: int) -> list:
    try:
        prob = _load(src)
    except (MpsParseError, InnerLPError, OSError, UnicodeDecodeError, ValueError):
        name = _source_name(src)
        return [BenchRecord(name, 0, 0, sid, PARSE_ERROR, 0, 0, math.nan, math.nan, math.nan) for sid, _ in solvers]
    if not prob.name:
        prob.name = _source_name(src)
    return [_run_one(prob, sid, how, repeat) for sid, how in solvers]


def _normalize_solvers(solvers) -> list:
    if isinstance(solvers, Mapping):
        return list(solvers.items())
    out = []
    for s in solvers:
        if isinstance(s, IpmConfig):
            out.append((solver_id(s), s))
        elif isinstance(s, str):
            cfg = IpmConfig(solver=s)
            out.append((solver_id(cfg), cfg))
        else:
            out.append(tuple(s))
    ids = [sid for sid, _ in out]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate solver ids: {ids}")
    return out


def run_suite(problems: Iterable[ProblemSource], solvers, out=None, *, repeat=1, jobs=1) -> list:
    """Solve every problem with every solver and return one record per pair.

    ``solvers`` is a mapping from id to an :class:`IpmConfig` or to a callable
    returning an :class:`IpmResult`, or a list of configs or method names.
    Failures become records and never stop the suite. With ``jobs > 1``
    problems are spread over worker processes; records keep input order and
    are written by this process only. ``wall_ms`` is the median over
    ``repeat`` runs.
    """
    if repeat < 1 or jobs < 1:
        raise ValueError("repeat and jobs must be positive")
    problems = list(problems)
    pairs = _normalize_solvers(solvers)
    if jobs == 1 or len(problems) <= 1:
        chunks = [_run_problem(src, pairs, repeat) for src in problems]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_problem, problems, [pairs] * len(problems), [repeat] * len(problems)))
    records = [r for chunk in chunks for r in chunk]
    if out is not None:
        if isinstance(out, (str, os.PathLike)):
            with open(out, "w", newline="") as fh:
                write_records(records, fh)
        else:
            write_records(records, out)
    return records


# --------------------------------------------------------------------------
# performance profiles


@dataclass(frozen=True)
class ProfilePoint:
    solver: str
    tau: float
    pi: float


_METRICS = {"time": "wall_ms", "wall_ms": "wall_ms", "iters": "ipm_iters", "ipm_iters": "ipm_iters",
            "krylov": "krylov_iters", "krylov_iters": "krylov_iters"}


def performance_profile(records: Iterable[BenchRecord], metric="time") -> list:
    """Dolan-More profile points on the union of all breakpoints.

    A run counts as solved when its status is Optimal and its metric is
    finite; unsolved runs get ``r_ps = inf``. Problems no solver solved are
    dropped with a warning. For each solver the result lists ``pi(tau)`` at
    ``tau = 0`` and at every finite ``log2 r_ps`` of any solver, so the step
    function can be read off exactly.
    """
    key = _METRICS.get(metric)
    if key is None:
        raise ValueError(f"unknown metric {metric!r}; choose from {sorted(_METRICS)}")
    records = list(records)
    solvers = list(dict.fromkeys(r.solver for r in records))
    problems = list(dict.fromkeys(r.problem for r in records))
    if not solvers or not problems:
        raise ValueError("a profile needs at least one solver and one problem")
    cost = {}
    for r in records:
        v = float(getattr(r, key))
        cost[r.problem, r.solver] = v if r.solved and math.isfinite(v) else math.inf
    ratios = {s: [] for s in solvers}
    for p in problems:
        row = {s: cost.get((p, s), math.inf) for s in solvers}
        best = min(row.values())
        if math.isinf(best):
            warnings.warn(f"problem {p!r} was not solved by any solver; excluded from the profile", stacklevel=2)
            continue
        for s, t in row.items():
            if math.isinf(t):
                ratios[s].append(math.inf)
            elif best > 0:
                ratios[s].append(t / best)
            else:
                ratios[s].append(1.0 if t == 0 else math.inf)
    n_used = len(next(iter(ratios.values())))
    if n_used == 0:
        return [ProfilePoint(s, 0.0, 0.0) for s in solvers]
    logs = {s: np.log2(np.asarray(v)) for s, v in ratios.items()}
    taus = sorted({0.0} | {float(t) for v in logs.values() for t in v if math.isfinite(t)})
    points = []
    for s in solvers:
        v = np.sort(logs[s])
        for tau in taus:
            k = int(np.searchsorted(v, tau, side="right"))
            points.append(ProfilePoint(s, tau, k / n_used))
    return points


def write_profile(points: Iterable[ProfilePoint], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(PROFILE_FIELDS)
    for p in points:
        w.writerow([p.solver, repr(p.tau), repr(p.pi)])
