import numpy as np
import pytest

from innerlp.errors import DimensionError, IndefiniteMatrixError
from innerlp.ldlt import DEFAULT_DROP_TOL, FALLBACK_DROP_TOL, ldlt_drop_factor, ldlt_drop_solve

from conftest import rel


def reconstruct(fac):
    return fac.L @ np.diag(fac.g) @ fac.L.T


def test_defaults():
    assert DEFAULT_DROP_TOL == 1e-16 and FALLBACK_DROP_TOL == 1e-6


def test_identity():
    fac = ldlt_drop_factor(np.eye(3))
    np.testing.assert_array_equal(fac.L, np.eye(3))
    np.testing.assert_array_equal(fac.g, np.ones(3))
    np.testing.assert_array_equal(fac.kept, [0, 1, 2])
    f = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(ldlt_drop_solve(fac, f), f)


def test_small_pivot_dropped():
    fac = ldlt_drop_factor(np.diag([1.0, 0.0, 2.0]))
    np.testing.assert_array_equal(fac.kept, [0, 2])
    np.testing.assert_array_equal(fac.dropped, [1])
    dy = ldlt_drop_solve(fac, np.array([3.0, 5.0, 4.0]))
    np.testing.assert_array_equal(dy, [3.0, 0.0, 2.0])


def test_coupled_three_by_three():
    # second pivot vanishes after elimination; the solve zeroes that coordinate exactly
    M = np.array([[4.0, 2.0, 2.0], [2.0, 1.0, 1.0], [2.0, 1.0, 5.0]])
    fac = ldlt_drop_factor(M)
    np.testing.assert_array_equal(fac.kept, [0, 2])
    f = np.array([1.0, 7.0, 2.0])
    dy = ldlt_drop_solve(fac, f)
    assert dy[1] == 0.0 and np.signbit(dy[1]) == False  # noqa: E712
    sub = M[np.ix_([0, 2], [0, 2])]
    assert rel(dy[[0, 2]], np.linalg.solve(sub, f[[0, 2]])) <= 1e-14


def test_rank_deficient_gram(rng):
    B = rng.standard_normal((6, 4))
    M = B @ B.T
    fac = ldlt_drop_factor(M, FALLBACK_DROP_TOL)
    assert fac.kept.size == 4
    assert np.all(fac.g > FALLBACK_DROP_TOL)
    assert np.allclose(np.diag(fac.L), 1.0)
    assert np.linalg.norm(reconstruct(fac) - M[np.ix_(fac.kept, fac.kept)]) <= 1e-10
    f = M @ rng.standard_normal(6)  # consistent
    dy = ldlt_drop_solve(fac, f)
    assert np.all(dy[fac.dropped] == 0.0)
    assert rel(M @ dy, f) <= 1e-8


def test_rank_deficient_tiny_tol_is_roundoff_sensitive():
    # with an absolute tolerance of 1e-16 the zero pivots of B B^T come out as
    # +-1e-15 roundoff: they are either kept or reported as indefinite
    outcomes = set()
    for seed in range(20):
        B = np.random.default_rng(seed).standard_normal((6, 4))
        try:
            outcomes.add(ldlt_drop_factor(B @ B.T).kept.size)
        except IndefiniteMatrixError:
            outcomes.add("indefinite")
    assert "indefinite" in outcomes


def test_full_rank_matches_dense(rng):
    B = rng.standard_normal((8, 8))
    M = B @ B.T + 0.1 * np.eye(8)
    fac = ldlt_drop_factor(M)
    assert fac.kept.size == 8
    f = rng.standard_normal(8)
    assert rel(ldlt_drop_solve(fac, f), np.linalg.solve(M, f)) <= 1e-10
    assert np.linalg.norm(reconstruct(fac) - M) <= 1e-12 * np.linalg.norm(M)


def test_indefinite_rejected():
    with pytest.raises(IndefiniteMatrixError):
        ldlt_drop_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_input_validation():
    with pytest.raises(DimensionError):
        ldlt_drop_factor(np.ones((2, 3)))
    with pytest.raises(ValueError):
        ldlt_drop_factor(np.eye(2), -1.0)
    with pytest.raises(DimensionError):
        ldlt_drop_solve(ldlt_drop_factor(np.eye(2)), np.ones(3))


def test_all_dropped():
    fac = ldlt_drop_factor(np.zeros((3, 3)))
    assert fac.kept.size == 0
    np.testing.assert_array_equal(ldlt_drop_solve(fac, np.ones(3)), np.zeros(3))
