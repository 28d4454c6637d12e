"""Compiled CSR kernels.

Every kernel sees the operator ``diag(rs) @ A @ diag(cs)`` through the raw CSR
arrays of ``A`` and the two scaling vectors, so the scaled matrix is never
stored. Plain ``A`` is the special case ``rs = cs = 1``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def csr_matvec(indptr, indices, data, cs, rs, x):
    m = indptr.size - 1
    y = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            acc += data[k] * cs[j] * x[j]
        y[i] = rs[i] * acc
    return y


@njit(cache=True)
def csr_rmatvec(indptr, indices, data, cs, rs, y, n):
    m = indptr.size - 1
    x = np.zeros(n)
    for i in range(m):
        yi = rs[i] * y[i]
        if yi == 0.0:
            continue
        for k in range(indptr[i], indptr[i + 1]):
            x[indices[k]] += data[k] * yi
    for j in range(n):
        x[j] *= cs[j]
    return x


@njit(cache=True)
def csr_row_sqnorms(indptr, indices, data, cs, rs):
    m = indptr.size - 1
    out = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            v = data[k] * cs[indices[k]]
            acc += v * v
        out[i] = rs[i] * rs[i] * acc
    return out


@njit(cache=True)
def _row_update(indptr, indices, data, cs, rs, sqn, i, gi, omega, z):
    # one projection step onto row i; returns the multiplier increment
    lo = indptr[i]
    hi = indptr[i + 1]
    acc = 0.0
    for k in range(lo, hi):
        j = indices[k]
        acc += data[k] * cs[j] * z[j]
    d = omega * (gi - rs[i] * acc) / sqn[i]
    f = d * rs[i]
    for k in range(lo, hi):
        j = indices[k]
        z[j] += f * data[k] * cs[j]
    return d


@njit(cache=True)
def ne_sor_sweeps(indptr, indices, data, cs, rs, sqn, g, omega, ell, n):
    m = indptr.size - 1
    z = np.zeros(n)
    p = np.zeros(m)
    for _ in range(ell):
        for i in range(m):
            if sqn[i] == 0.0:
                continue
            p[i] += _row_update(indptr, indices, data, cs, rs, sqn, i, g[i], omega, z)
    return z, p


@njit(cache=True)
def ne_ssor_sweeps(indptr, indices, data, cs, rs, sqn, g, omega, ell, n):
    m = indptr.size - 1
    u = np.zeros(n)
    z = np.zeros(m)
    for _ in range(ell):
        for i in range(m):
            if sqn[i] == 0.0:
                continue
            z[i] += _row_update(indptr, indices, data, cs, rs, sqn, i, g[i], omega, u)
        for i in range(m - 1, -1, -1):
            if sqn[i] == 0.0:
                continue
            z[i] += _row_update(indptr, indices, data, cs, rs, sqn, i, g[i], omega, u)
    return z, u
