"""Command-line entry point: ``innerlp solve|bench|gen|profile``.

Exit codes: 0 on success (Optimal, or a completed suite), 1 on usage
errors, 2 when an input file cannot be parsed, 3 when ``solve`` does not
reach optimality.
"""

from __future__ import annotations

import argparse
import glob
import logging
import os
import sys
import warnings
from dataclasses import replace

from . import netlib
from .bench import GenSpec, generate_problem, performance_profile, read_records, run_suite, standard_to_lp, write_profile
from .errors import InfeasibleError, MpsParseError
from .inner import InnerIterConfig
from .ipm import LDLT, IpmConfig, Status, solve
from .krylov import KrylovConfig, Method
from .mps import read_mps, to_standard_form, write_mps

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_SOLVER = 3

METHODS = [m.value for m in Method] + [LDLT]
NETLIB_TOKEN = "@netlib"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _solver_options(p):
    p.add_argument("--omega", type=float, default=1.0, help="relaxation parameter of the inner sweeps (default 1.0)")
    p.add_argument("--ell", type=int, default=5, help="number of inner sweeps per preconditioner application (default 5)")
    p.add_argument("--eps-out", type=float, default=1e-8, help="outer stopping tolerance on Gamma")
    p.add_argument("--max-ipm", type=int, default=99, help="maximum number of interior-point steps")
    p.add_argument("--drop-tol", type=float, default=None, help="LDLT pivot dropping tolerance (default 1e-16)")
    p.add_argument("--fallback-tol", type=float, default=None,
                   help="LDLT: retry a failed factorization with this dropping tolerance")


def _config(args, method) -> IpmConfig:
    try:
        inner = InnerIterConfig(omega=args.omega, ell=args.ell)
        cfg = IpmConfig(
            solver=method,
            eps_out=args.eps_out,
            max_ipm_iter=args.max_ipm,
            krylov=KrylovConfig(inner=inner),
            ldlt_fallback_tol=args.fallback_tol,
        )
        if args.drop_tol is not None:
            cfg = replace(cfg, ldlt_drop_tol=args.drop_tol)
        if method != LDLT and method != Method.ABGMRES.value:
            inner.require_odd()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def build_parser():
    ap = _Parser(prog="innerlp", description="Interior-point LP solver with inner-iteration preconditioned Krylov solves.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log warnings from the solver")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one MPS file")
    p.add_argument("file")
    p.add_argument("--method", choices=METHODS, default=Method.ABGMRES.value)
    _solver_options(p)
    p.add_argument("--trace", metavar="CSV", help="write one row per interior-point step")

    p = sub.add_parser("bench", help="run methods over a set of problems")
    p.add_argument("sources", nargs="+",
                   help=f"MPS files, directories of MPS files, text files listing paths, or {NETLIB_TOKEN}")
    p.add_argument("--methods", default="abgmres,cgne,mrne", help="comma-separated list from " + ",".join(METHODS))
    p.add_argument("--repeat", type=int, default=1, help="runs per pair; wall time is the median")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output CSV")
    _solver_options(p)

    p = sub.add_parser("gen", help="write a random rank-deficient LP as MPS")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--cond", type=float, default=1e2)
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("profile", help="performance profile from a bench CSV")
    p.add_argument("results")
    p.add_argument("--metric", choices=["time", "iters", "krylov"], default="time")
    p.add_argument("--out", required=True)
    return ap


def _expand_sources(items):
    out = []
    for item in items:
        if item == NETLIB_TOKEN:
            out.extend(os.fspath(netlib.netlib_path(n)) for n in netlib.NETLIB_PROBLEMS)
        elif os.path.isdir(item):
            found = sorted(glob.glob(os.path.join(item, "*.mps")) + glob.glob(os.path.join(item, "*.mps.gz")))
            out.extend(found)
        elif item.endswith(".txt") and os.path.isfile(item):
            with open(item) as fh:
                base = os.path.dirname(item)
                out.extend(os.path.join(base, ln.strip()) for ln in fh if ln.strip() and not ln.startswith("#"))
        else:
            out.append(item)
    return out


def cmd_solve(args):
    cfg = _config(args, args.method)
    try:
        lp = read_mps(args.file)
        std = to_standard_form(lp)
    except (MpsParseError, InfeasibleError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    res = solve(std, cfg)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            res.trace.write_csv(fh)
    obj = std.original_objective(res.iterate.x)
    m, n = std.shape
    print(f"problem   {lp.name} ({m} x {n} in standard form)")
    print(f"method    {cfg.solver}")
    print(f"status    {res.status.value}")
    print(f"iters     {res.iterations} interior-point, {res.trace.krylov_iterations} Krylov")
    print(f"gamma     {res.gamma:.3e}")
    print(f"objective {obj:.10g}")
    if res.trace.message:
        print(f"message   {res.trace.message}")
    return EXIT_OK if res.status is Status.OPTIMAL else EXIT_SOLVER


def cmd_bench(args):
    methods = [s.strip() for s in args.methods.split(",") if s.strip()]
    bad = [mth for mth in methods if mth not in METHODS]
    if bad or not methods:
        raise UsageError(f"unknown methods {bad}; choose from {','.join(METHODS)}")
    if args.repeat < 1 or args.jobs < 1:
        raise UsageError("--repeat and --jobs must be positive")
    configs = [_config(args, mth) for mth in methods]
    records = run_suite(_expand_sources(args.sources), configs, args.out, repeat=args.repeat, jobs=args.jobs)
    solved = sum(r.solved for r in records)
    print(f"{len(records)} records, {solved} optimal, written to {args.out}")
    return EXIT_OK


def cmd_gen(args):
    try:
        spec = GenSpec(args.m, args.n, args.rank, args.cond, args.density, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    prob = generate_problem(spec)
    with open(args.out, "w") as fh:
        write_mps(standard_to_lp(prob), fh)
    print(f"{prob.name}: {prob.A.nrows} x {prob.A.ncols}, {prob.A.nnz} nonzeros, written to {args.out}")
    return EXIT_OK


def cmd_profile(args):
    try:
        records = read_records(args.results)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {args.results}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if not records:
        raise UsageError("the results file has no records")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        points = performance_profile(records, args.metric)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    with open(args.out, "w", newline="") as fh:
        write_profile(points, fh)
    print(f"{len(points)} profile points written to {args.out}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "gen": cmd_gen, "profile": cmd_profile}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"innerlp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
