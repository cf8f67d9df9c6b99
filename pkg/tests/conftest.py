"""Shared test helpers: independent oracles kept deliberately dumb."""

import numpy as np
import pytest


def dense_generalized_eigs(K, M):
    """All eigenvalues of K x = s M x by Cholesky reduction, ascending.

    Independent of the package solvers: numpy dense factorisations only.
    """
    K = K.to_dense() if hasattr(K, "to_dense") else np.asarray(K)
    M = M.to_dense() if hasattr(M, "to_dense") else np.asarray(M)
    L = np.linalg.cholesky(M)
    Y = np.linalg.solve(L, K)
    B = np.linalg.solve(L, Y.T).T
    return np.linalg.eigvalsh(0.5 * (B + B.T))


def bisect(f, lo, hi, iters=200):
    """Plain bisection for oracle root-finding; assumes a sign change."""
    flo = f(lo)
    assert flo * f(hi) < 0, "no sign change"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = f(lo)
    return 0.5 * (lo + hi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
