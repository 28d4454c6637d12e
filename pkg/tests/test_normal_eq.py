import numpy as np
import pytest

from innerlp.errors import DimensionError, InteriorError
from innerlp.inner import InnerIterConfig
from innerlp.krylov import KrylovConfig, Method, krylov_solve
from innerlp.normal_eq import (
    build_scaled_system,
    corrector_rhs,
    predictor_rhs,
    recover_corrector,
    recover_predictor,
)
from innerlp.sparse import CsrMatrix, row_norms

from conftest import rel


def instance(rng, m=5, n=8):
    A = rng.standard_normal((m, n))
    x = rng.uniform(0.1, 3.0, n)
    s = rng.uniform(0.1, 3.0, n)
    return A, CsrMatrix.from_dense(A), x, s


class TestBuild:
    def test_unit_scaling(self, rng):
        A, M, _, _ = instance(rng)
        sys = build_scaled_system(M, np.ones(8), np.ones(8))
        np.testing.assert_array_equal(sys.d, np.ones(8))
        assert rel(sys.to_dense(), A / np.linalg.norm(A, axis=1)[:, None]) <= 1e-15

    def test_one_by_one(self):
        sys = build_scaled_system(CsrMatrix.identity(1), np.array([4.0]), np.array([1.0]))
        np.testing.assert_array_equal(sys.d, [2.0])
        np.testing.assert_array_equal(sys.rho, [2.0])
        np.testing.assert_array_equal(sys.to_dense(), [[1.0]])

    def test_dense_oracle(self, rng):
        A, M, x, s = instance(rng)
        sys = build_scaled_system(M, x, s)
        AD = A * np.sqrt(x / s)
        dense = AD / np.linalg.norm(AD, axis=1)[:, None]
        cols = np.column_stack([sys.apply(e) for e in np.eye(8)])
        assert np.abs(cols - dense).max() <= 1e-13 * np.abs(dense).max()

    def test_unit_rows(self, rng):
        _, M, x, s = instance(rng, 12, 20)
        x[:3] = 1e-9
        s[3:6] = 1e-9
        sys = build_scaled_system(M, x, s)
        np.testing.assert_allclose(row_norms(CsrMatrix.from_dense(sys.to_dense())), 1.0, atol=1e-12)
        np.testing.assert_array_equal(sys.operator.sq_row_norms, np.ones(12))

    def test_operator_cost(self, rng):
        _, M, x, s = instance(rng)
        sys = build_scaled_system(M, x, s)
        before = sys.operator.mv_count
        sys.apply(np.ones(8))
        assert sys.operator.mv_count - before == 1

    def test_clamp(self):
        sys = build_scaled_system(CsrMatrix.identity(2), np.array([1e-200, 1.0]), np.array([1.0, 1.0]))
        assert sys.clamped == 1
        assert np.all(np.isfinite(sys.d)) and sys.d[0] > 0

    def test_interior_required(self, rng):
        _, M, x, s = instance(rng)
        s[2] = 0.0
        with pytest.raises(InteriorError):
            build_scaled_system(M, x, s)
        with pytest.raises(DimensionError):
            build_scaled_system(M, x[:-1], s[:-1])


class TestRhs:
    def test_predictor_dual_feasible(self, rng):
        _, M, x, s = instance(rng)
        b = rng.standard_normal(5)
        sys = build_scaled_system(M, x, s)
        np.testing.assert_array_equal(predictor_rhs(sys, b, np.zeros(8), x, s, scaled=False), b)

    def test_predictor_one_by_one(self):
        x, s = np.array([1.0]), np.array([1.0])
        sys = build_scaled_system(CsrMatrix.identity(1), x, s)
        np.testing.assert_array_equal(predictor_rhs(sys, [2.0], [3.0], x, s, scaled=False), [5.0])

    def test_predictor_dense(self, rng):
        A, M, x, s = instance(rng)
        b, r_d = rng.standard_normal(5), rng.standard_normal(8)
        sys = build_scaled_system(M, x, s)
        ref = b + A @ (x / s * r_d)
        rho = np.linalg.norm(A * np.sqrt(x / s), axis=1)
        assert rel(predictor_rhs(sys, b, r_d, x, s), ref / rho) <= 1e-13

    def test_corrector_cancellation(self, rng):
        _, M, x, s = instance(rng)
        sys = build_scaled_system(M, x, s)
        dx = rng.uniform(0.5, 2.0, 8)
        ds = 0.3 / dx
        f = corrector_rhs(sys, dx, ds, 0.1, 3.0, s)
        assert np.abs(f).max() <= 1e-15

    def test_corrector_one_by_one(self):
        s = np.array([2.0])
        sys = build_scaled_system(CsrMatrix.identity(1), np.array([1.0]), s)
        np.testing.assert_array_equal(corrector_rhs(sys, [1.0], [4.0], 0.0, 1.0, s, scaled=False), [2.0])

    def test_corrector_dense(self, rng):
        A, M, x, s = instance(rng)
        dx, ds = rng.standard_normal(8), rng.standard_normal(8)
        sys = build_scaled_system(M, x, s)
        ref = A @ ((dx * ds - 0.2 * 0.7) / s)
        rho = np.linalg.norm(A * np.sqrt(x / s), axis=1)
        assert rel(corrector_rhs(sys, dx, ds, 0.2, 0.7, s), ref / rho) <= 1e-13

    def test_dimension_checked(self, rng):
        _, M, x, s = instance(rng)
        sys = build_scaled_system(M, x, s)
        with pytest.raises(DimensionError):
            predictor_rhs(sys, np.ones(4), np.ones(8), x, s)


class TestRecover:
    def test_predictor_zero(self, rng):
        _, M, x, s = instance(rng)
        sys = build_scaled_system(M, x, s)
        dx, ds = recover_predictor(sys, np.zeros(8), np.zeros(8), x)
        np.testing.assert_array_equal(ds, np.zeros(8))
        np.testing.assert_array_equal(dx, -x)

    def test_predictor_one_by_one(self):
        sys = build_scaled_system(CsrMatrix.identity(1), np.array([4.0]), np.array([1.0]))
        dx, ds = recover_predictor(sys, np.array([2.0]), np.array([0.0]), np.array([1.0]))
        np.testing.assert_array_equal(ds, [-1.0])
        np.testing.assert_array_equal(dx, [3.0])

    def test_corrector_zero(self, rng):
        _, M, x, s = instance(rng)
        sys = build_scaled_system(M, x, s)
        dx, ds = recover_corrector(sys, np.zeros(8), np.zeros(8), np.zeros(8), 0.0, 1.0, s)
        np.testing.assert_array_equal(dx, np.zeros(8))
        np.testing.assert_array_equal(ds, np.zeros(8))

    def test_corrector_one_by_one(self):
        s = np.array([1.0])
        sys = build_scaled_system(CsrMatrix.identity(1), np.array([1.0]), s)
        dx, ds = recover_corrector(sys, np.array([1.0]), np.zeros(1), np.zeros(1), 0.0, 1.0, s)
        np.testing.assert_array_equal(ds, [-1.0])
        np.testing.assert_array_equal(dx, [1.0])


@pytest.mark.parametrize("method", list(Method))
def test_newton_blocks(rng, method):
    m, n = 6, 11
    A, M, x, s = instance(rng, m, n)
    y = rng.standard_normal(m)
    b = A @ rng.uniform(0.5, 1.5, n)
    c = A.T @ y + rng.uniform(0.5, 1.5, n)
    r_p, r_d = b - A @ x, c - A.T @ y - s
    mu = x @ s / n
    sys = build_scaled_system(M, x, s)
    kcfg = KrylovConfig(method, tol=1e-12, inner=InnerIterConfig(1.0, 3))

    dw, p, _ = krylov_solve(sys.operator, predictor_rhs(sys, b, r_d, x, s), kcfg, return_multiplier=True)
    dy_af = sys.unscale_multiplier(p)
    dx_af, ds_af = recover_predictor(sys, dw, r_d, x)
    tol = 1e-8
    assert rel(A @ dx_af, r_p) <= tol
    assert rel(A.T @ dy_af + ds_af, r_d) <= tol
    assert rel(s * dx_af + x * ds_af, -x * s) <= tol

    sigma = 0.1
    dw, p, _ = krylov_solve(sys.operator, corrector_rhs(sys, dx_af, ds_af, sigma, mu, s), kcfg, return_multiplier=True)
    dy_cc = sys.unscale_multiplier(p)
    dx_cc, ds_cc = recover_corrector(sys, dw, dx_af, ds_af, sigma, mu, s)
    scale = np.linalg.norm(dx_af * ds_af) + sigma * mu
    assert np.linalg.norm(A @ dx_cc) <= tol * scale * np.linalg.norm(A)
    assert np.linalg.norm(A.T @ dy_cc + ds_cc) <= tol * np.linalg.norm(ds_cc)
    assert rel(s * dx_cc + x * ds_cc, sigma * mu - dx_af * ds_af) <= tol

    # combined direction satisfies the full Newton system with the corrector right-hand side
    dx, dy, ds = dx_af + dx_cc, dy_af + dy_cc, ds_af + ds_cc
    assert rel(A @ dx, r_p) <= tol
    assert rel(A.T @ dy + ds, r_d) <= tol
    assert rel(s * dx + x * ds, -x * s - dx_af * ds_af + sigma * mu) <= tol


def test_unscaling_identity(rng):
    A, M, x, s = instance(rng)
    sys = build_scaled_system(M, x, s)
    dw = rng.standard_normal(8)
    f = rng.standard_normal(5)
    scaled_res = sys.scale_rhs(f) - sys.apply(dw)
    unscaled_res = f - A @ (np.sqrt(x / s) * dw)
    assert rel(sys.rho * scaled_res, unscaled_res) <= 1e-13
