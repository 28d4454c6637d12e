import numpy as np
import pytest

from innerlp.sparse import CsrMatrix


def random_sparse(rng, m, n, density=0.5):
    """Random dense array with roughly ``density`` nonzeros."""
    M = rng.standard_normal((m, n))
    M[rng.random((m, n)) > density] = 0.0
    return M


def random_rank(rng, m, n, r):
    """Dense ``m x n`` matrix of exact rank ``r`` with O(1) singular values."""
    U = np.linalg.qr(rng.standard_normal((m, r)))[0]
    V = np.linalg.qr(rng.standard_normal((n, r)))[0]
    return (U * rng.uniform(0.5, 2.0, r)) @ V.T


def min_norm(M, f):
    """SVD pseudoinverse oracle."""
    return np.linalg.pinv(M, rcond=1e-10) @ f


def rel(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def csr():
    return CsrMatrix.from_dense


# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
