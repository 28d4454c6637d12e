"""Acceptance criteria 1-9.

Each test stores one ``criterion N: PASS|FAIL ...`` line that the terminal
summary prints at the end of the run, then asserts. Criterion 7 is the slow
one (about 40 minutes on one core); deselect it with ``-m "not slow"``.
"""

import logging
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, min_norm, random_rank, rel
from innerlp.bench import BenchRecord, GenSpec, generate_problem, performance_profile
from innerlp.inner import InnerIterConfig, ne_ssor_apply
from innerlp.ipm import LDLT, IpmConfig, Status, solve
from innerlp.krylov import KrylovConfig, Method, krylov_solve
from innerlp.mps import StandardFormLp, to_standard_form
from innerlp.netlib import NETLIB_PROBLEMS, OPTIMAL_OBJECTIVE, PUBLISHED_ITERATIONS, PUBLISHED_SIZES, load_netlib
from innerlp.normal_eq import build_scaled_system
from innerlp.sparse import CsrMatrix, row_norms

KRYLOV = [m.value for m in Method]


def verdict(n, ok, detail):
    ACCEPTANCE_LINES[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[n])
    return ok


@pytest.fixture(scope="module")
def netlib_runs():
    runs = {}
    for name in NETLIB_PROBLEMS:
        std = to_standard_form(load_netlib(name))
        for method in KRYLOV + [LDLT]:
            res = solve(std, IpmConfig(solver=method))
            runs[name, method] = (std, res)
    return runs


def test_criterion_1_netlib_convergence(netlib_runs):
    bad = []
    rows = []
    for name in NETLIB_PROBLEMS:
        std, _ = netlib_runs[name, KRYLOV[0]]
        if std.shape != PUBLISHED_SIZES[name]:
            bad.append(f"{name} size {std.shape}")
        for method in KRYLOV:
            _, res = netlib_runs[name, method]
            ref_iters = PUBLISHED_ITERATIONS[name][method]
            rows.append(f"{name}/{method}={res.iterations}({ref_iters})")
            if res.status is not Status.OPTIMAL or not res.gamma <= 1e-8:
                bad.append(f"{name}/{method} {res.status.value} gamma={res.gamma:.1e}")
            elif not ref_iters / 2 <= res.iterations <= 2 * ref_iters:
                bad.append(f"{name}/{method} {res.iterations} iterations vs published {ref_iters}")
    ok = verdict(1, not bad, "; ".join(bad) if bad else f"21 runs Optimal, iterations within 2x of the published counts: {' '.join(rows)}")
    assert ok, bad


def test_criterion_2_objective(netlib_runs):
    worst = 0.0
    bad = []
    for name in NETLIB_PROBLEMS:
        std, ref_res = netlib_runs[name, LDLT]
        assert ref_res.status is Status.OPTIMAL
        ref = std.original_objective(ref_res.iterate.x)
        # the oracle itself agrees with the published optimum
        assert abs(ref - OPTIMAL_OBJECTIVE[name]) <= 1e-6 * abs(OPTIMAL_OBJECTIVE[name])
        for method in KRYLOV:
            _, res = netlib_runs[name, method]
            err = abs(std.original_objective(res.iterate.x) - ref) / abs(ref)
            worst = max(worst, err)
            if not err <= 1e-6:
                bad.append(f"{name}/{method} rel err {err:.1e}")
    ok = verdict(2, not bad, "; ".join(bad) if bad else f"max relative objective error vs LDLT oracle {worst:.1e}")
    assert ok, bad


def consistent_systems(count=100, seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        m = int(rng.integers(3, 13))
        n = int(rng.integers(m, 19))
        r = int(rng.integers(3, m + 1))
        A = random_rank(rng, m, n, r)
        yield A, A @ rng.standard_normal(n)


@pytest.fixture(scope="module")
def criterion3_runs():
    runs = []
    for A, f in consistent_systems():
        out = {}
        for method in Method:
            dw, rep = krylov_solve(A, f, KrylovConfig(method, tol=1e-12))
            out[method] = (dw, rep)
        runs.append((A, f, out))
    return runs


def test_criterion_3_min_norm(criterion3_runs):
    t0 = time.perf_counter()
    worst = {m: 0.0 for m in Method}
    for A, f, out in criterion3_runs:
        ref = min_norm(A, f)
        for method, (dw, _) in out.items():
            worst[method] = max(worst[method], rel(dw, ref))
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-7 for v in worst.values())
    detail = ", ".join(f"{m.value} max rel err {v:.1e}" for m, v in worst.items())
    verdict(3, ok, f"100 systems; {detail}")
    assert ok, worst
    assert elapsed < 10


def test_criterion_4_scaling_invariance():
    rng = np.random.default_rng(77)
    worst = 0.0
    worst_norm = 0.0
    for _ in range(50):
        m = int(rng.integers(3, 11))
        n = int(rng.integers(m, 17))
        A = random_rank(rng, m, n, int(rng.integers(2, m + 1)))
        f = A @ rng.standard_normal(n)
        scale = np.exp(rng.uniform(-4, 4, m))
        for method in Method:
            cfg = KrylovConfig(method, tol=1e-12)
            dw, _ = krylov_solve(A, f, cfg)
            dws, _ = krylov_solve(A / scale[:, None], f / scale, cfg)
            worst = max(worst, rel(dws, dw))
        sys = build_scaled_system(CsrMatrix.from_dense(A), rng.uniform(1e-3, 1e3, n), rng.uniform(1e-3, 1e3, n))
        nrm = row_norms(CsrMatrix.from_dense(sys.to_dense()))
        worst_norm = max(worst_norm, float(np.abs(nrm - 1.0).max()))
    ok = worst <= 1e-7 and worst_norm <= 1e-12
    verdict(4, ok, f"50 instances x 3 methods: max rel diff {worst:.1e}; max |row norm - 1| {worst_norm:.1e}")
    assert ok


def test_criterion_5_ssor_spd():
    rng = np.random.default_rng(5)
    worst_sym = 0.0
    min_eig = math.inf
    even_indef = 0
    for m in range(1, 9):
        A = rng.standard_normal((m, m + int(rng.integers(0, 6))))
        for omega in (0.5, 1.0, 1.5):
            for ell in (1, 3, 5):
                C = np.column_stack([ne_ssor_apply(A, e, InnerIterConfig(omega, ell))[0] for e in np.eye(m)])
                worst_sym = max(worst_sym, float(np.abs(C - C.T).max() / np.abs(C).max()))
                min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (C + C.T)).min()))
            # ell = 2: reported only, never asserted
            C2 = np.column_stack([ne_ssor_apply(A, e, InnerIterConfig(omega, 2))[0] for e in np.eye(m)])
            even_indef += np.linalg.eigvalsh(0.5 * (C2 + C2.T)).min() <= 0
    ok = worst_sym <= 1e-11 and min_eig > 0
    verdict(5, ok, f"m=1..8, ell in {{1,3,5}}, omega in {{0.5,1,1.5}}: max asymmetry {worst_sym:.1e}, "
                   f"min eigenvalue {min_eig:.2e} (ell=2 not definite in {even_indef} of 24 cases, not asserted)")
    assert ok


def test_criterion_6_monotone(criterion3_runs):
    worst = {Method.MRNE: 0.0, Method.ABGMRES: 0.0}
    for _, _, out in criterion3_runs:
        for method in worst:
            rep = out[method][1]
            hist = rep.minimized_history if method is Method.MRNE else rep.residual_history
            inc = max((b - a for a, b in zip(hist, hist[1:])), default=0.0)
            worst[method] = max(worst[method], inc)
    ok = all(v <= 1e-12 for v in worst.values())
    verdict(6, ok, "largest increase per iteration: " + ", ".join(f"{m.value} {max(v, 0.0):.1e}" for m, v in worst.items()))
    assert ok


RANKS = list(range(50, 101, 2))  # 26 ranks between 50 and 100
NEEDED = math.ceil(0.95 * len(RANKS))  # 25 of 26


def _rank_sweep(cond, density):
    """Run every method on the 26 instances of one set.

    A Krylov method stops on a set once it has failed more often than the 95%
    threshold allows; a failed run costs up to 99 interior-point steps with
    long inner solves, and the remaining instances cannot change the verdict.
    """
    logging.disable(logging.WARNING)
    try:
        problems = {r: generate_problem(GenSpec(100, 300, r, cond, density, seed=r)) for r in RANKS}
        summary = {}
        for method in KRYLOV + [LDLT]:
            solved, failed = [], []
            for r in RANKS:
                if method != LDLT and len(failed) > len(RANKS) - NEEDED:
                    break
                res = solve(problems[r], IpmConfig(solver=method))
                (solved if res.status is Status.OPTIMAL else failed).append((r, res.status.value))
            summary[method] = (solved, failed)
        return summary
    finally:
        logging.disable(logging.NOTSET)


@pytest.mark.slow
def test_criterion_7_rank_deficiency():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for label, cond, density in (("kappa=1e2 dense", 1e2, 1.0), ("kappa=1e8 density 0.5", 1e8, 0.5)):
        summary = _rank_sweep(cond, density)
        words = []
        for method in KRYLOV:
            solved, failed = summary[method]
            ok &= len(solved) >= NEEDED
            run = len(solved) + len(failed)
            note = "" if run == len(RANKS) else f" (stopped after {run} runs: {len(failed)} failures exceed the allowance)"
            words.append(f"{method} {len(solved)}/{run}{note}")
        solved, failed = summary[LDLT]
        words.append(f"ldlt {len(solved)}/26, failures recorded: "
                     + (" ".join(f"r{r}:{st}" for r, st in failed) or "none"))
        parts.append(f"{label}: " + ", ".join(words))
    verdict(7, ok, " | ".join(parts) + f" [{time.perf_counter() - t0:.0f}s]")
    assert ok, parts


def test_criterion_8_newton_consistency():
    rng = np.random.default_rng(8)
    A = rng.standard_normal((10, 20))
    b = A @ rng.uniform(0.5, 1.5, 20)
    c = A.T @ rng.standard_normal(10) + rng.uniform(0.5, 1.5, 20)
    p = StandardFormLp(CsrMatrix.from_dense(A), b, c)
    worst = 0.0
    steps = 0
    statuses = []
    for method in KRYLOV:
        cfg = IpmConfig(solver=method, eps_in_init=1e-12, eps_in_bounds=(1e-12, 1e-12))

        def check(info):
            nonlocal worst, steps
            it = info["iterate"]
            dx, dy, ds = info["direction"]
            dx_af, _, ds_af = info["predictor"]
            rhs3 = -it.x * it.s
            if info["corrector"] is not None:
                rhs3 = rhs3 - dx_af * ds_af + info["sigma"] * info["mu"]
            blocks = (
                (A @ dx, info["r_p"]),
                (A.T @ dy + ds, info["r_d"]),
                (it.s * dx + it.x * ds, rhs3),
            )
            # relative to the right-hand side of the whole system: near the optimum
            # r_p alone is roundoff-sized and a per-block ratio would divide noise by noise
            res = math.sqrt(sum(float(np.linalg.norm(lhs - rhs)) ** 2 for lhs, rhs in blocks))
            ref = math.sqrt(sum(float(np.linalg.norm(rhs)) ** 2 for _, rhs in blocks))
            worst = max(worst, res / ref)
            steps += 1

        res = solve(p, cfg, callback=check)
        statuses.append(res.status.value)
    ok = worst <= 1e-6 and all(s == "Optimal" for s in statuses)
    verdict(8, ok, f"{steps} steps over 3 methods ({', '.join(statuses)}): max block residual {worst:.1e}")
    assert ok


# three solvers, five problems; None marks a failed run
PROFILE_TIMES = {
    "P1": {"A": 1.0, "B": 2.0, "C": 4.0},
    "P2": {"A": 3.0, "B": 3.0, "C": 6.0},
    "P3": {"A": None, "B": 5.0, "C": 10.0},
    "P4": {"A": 8.0, "B": 2.0, "C": None},
    "P5": {"A": 1.0, "B": 4.0, "C": 1.0},
}
# hand-tabulated pi(tau) at tau = 0, 1, 2 (log2 ratios are 0, 1, 2 or inf)
PROFILE_EXPECTED = {
    "A": {0.0: 0.6, 1.0: 0.6, 2.0: 0.8},
    "B": {0.0: 0.6, 1.0: 0.8, 2.0: 1.0},
    "C": {0.0: 0.2, 1.0: 0.6, 2.0: 0.8},
}


def test_criterion_9_profile():
    records = [
        BenchRecord(p, 1, 1, s, "Optimal" if t is not None else "IterationLimit", 1, 1,
                    t if t is not None else math.nan, 0.0, 0.0)
        for p, row in PROFILE_TIMES.items() for s, t in row.items()
    ]
    pts = performance_profile(records, "time")
    got = {(q.solver, q.tau): q.pi for q in pts}

    def brute(solver, tau):
        hits = 0
        for row in PROFILE_TIMES.values():
            best = min(t for t in row.values() if t is not None)
            t = row[solver]
            hits += t is not None and t / best <= 2.0**tau
        return hits / len(PROFILE_TIMES)

    mismatches = [(s, tau) for s, table in PROFILE_EXPECTED.items() for tau, v in table.items() if got[s, tau] != v]
    mismatches += [(q.solver, q.tau) for q in pts if q.pi != brute(q.solver, q.tau)]
    # the step function between breakpoints is the value at the left breakpoint
    for s in "ABC":
        for tau in (0.5, 1.5, 2.5, 10.0):
            left = max(t for (s2, t) in got if s2 == s and t <= tau)
            if got[s, left] != brute(s, tau):
                mismatches.append((s, tau))
    ok = not mismatches and set(got) == {(s, t) for s in "ABC" for t in (0.0, 1.0, 2.0)}
    verdict(9, ok, f"{len(pts)} profile points equal the enumerated values" if ok else f"mismatches {mismatches}")
    assert ok
