"""Eigensolver contract tests: closed-form oracles, determinism, residuals."""

import numpy as np
import pytest

from elastica.assembly import (ElasticityProblem, assemble,
                               laplacian_inverse, reference_spectrum_alpha0)
from elastica.dst import ScalarLaplacianInverse
from elastica.eigensolve import (BandedCholesky, ConvergenceError,
                                 EigenResult, FactorizationError,
                                 IndefiniteMassError, banded_smallest,
                                 cholesky_banded, smallest_eigenpairs)
from elastica.sparse import BandedSymMatrix, SparseSymMatrix

PI = np.pi


def diag_csr(values):
    n = len(values)
    idx = np.arange(n)
    return SparseSymMatrix.from_coo(n, idx, idx, values)


def identity_csr(n):
    return diag_csr(np.ones(n))


def fd_laplacian_1d(n, h):
    """Three-point finite-difference Dirichlet Laplacian, n interior nodes."""
    idx = np.arange(n)
    rows = np.concatenate([idx, idx[1:], idx[:-1]])
    cols = np.concatenate([idx, idx[:-1], idx[1:]])
    vals = np.concatenate([np.full(n, 2.0), np.full(n - 1, -1.0),
                           np.full(n - 1, -1.0)]) / h ** 2
    return SparseSymMatrix.from_coo(n, rows, cols, vals)


class TestLOBPCG:
    def test_diagonal_case_exact(self):
        K = diag_csr(np.arange(1.0, 17.0))
        M = identity_csr(16)
        res = smallest_eigenpairs(K, M, 3, tol=1e-12, seed=1)
        assert np.allclose(res.values, [1.0, 2.0, 3.0], atol=1e-9)
        assert res.converged.all()

    def test_fd_laplacian_closed_form(self):
        # eigenvalues (4/h^2) sin^2(j h / 2) on (0, pi)
        n = 127
        h = PI / (n + 1)
        K = fd_laplacian_1d(n, h)
        M = identity_csr(n)
        precond = ScalarLaplacianInverse([(n, h)])
        tol = 1e-10
        res = smallest_eigenpairs(K, M, 5, tol=tol, seed=3,
                                  precond=precond.apply)
        j = np.arange(1, 6)
        exact = (4.0 / h ** 2) * np.sin(j * h / 2.0) ** 2
        assert np.all(np.abs(res.values - exact) <= 10 * tol * exact)

    def test_fd_laplacian_without_preconditioner(self):
        n = 63
        h = PI / (n + 1)
        K = fd_laplacian_1d(n, h)
        res = smallest_eigenpairs(K, identity_csr(n), 3, tol=1e-7, seed=5)
        exact = (4.0 / h ** 2) * np.sin(np.arange(1, 4) * h / 2.0) ** 2
        assert np.allclose(res.values, exact, rtol=1e-6)

    def test_box_alpha0_matches_reference(self):
        p = ElasticityProblem((PI, PI), 0.0, (24, 24))
        K, M, _ = assemble(p)
        res = smallest_eigenpairs(K, M, 12, tol=1e-9, seed=11,
                                  precond=laplacian_inverse(p))
        ref = reference_spectrum_alpha0((PI, PI), 12)
        # 24^2 mesh: discretization error ~1.2% at sigma = 10
        assert np.allclose(res.values, ref, rtol=2e-2)

    def test_3d_box_end_to_end(self):
        p = ElasticityProblem((PI, PI, PI), 0.0, (8, 8, 8))
        K, M, _ = assemble(p)
        res = smallest_eigenpairs(K, M, 3, tol=1e-9, seed=13,
                                  precond=laplacian_inverse(p))
        assert np.allclose(res.values, [3.0, 3.0, 3.0], rtol=2e-2)

    def test_multiplicity_recovery(self):
        # the degenerate pair {2,2} and quadruple {5,5,5,5} all come back
        p = ElasticityProblem((PI, PI), 0.0, (20, 20))
        K, M, _ = assemble(p)
        res = smallest_eigenpairs(K, M, 6, tol=1e-9, seed=2,
                                  precond=laplacian_inverse(p))
        clusters = np.round(res.values).astype(int)
        assert list(clusters) == [2, 2, 5, 5, 5, 5]
        spread = np.ptp(res.values[:2])
        assert spread < 1e-6 * res.values[0]

    def test_residual_contract_recheck(self):
        p = ElasticityProblem((PI, PI), 1.0, (16, 16))
        K, M, _ = assemble(p)
        tol = 1e-9
        res = smallest_eigenpairs(K, M, 8, tol=tol, seed=4,
                                  precond=laplacian_inverse(p))
        # explicit post-hoc matvec, independent of solver internals
        R = K.matvec(res.vectors) - M.matvec(res.vectors) * res.values
        fresh = np.linalg.norm(R, axis=0) / res.values
        assert np.all(fresh <= tol)
        assert np.all(res.residuals <= tol)

    def test_m_orthonormality(self):
        p = ElasticityProblem((PI, PI), 0.5, (16, 16))
        K, M, _ = assemble(p)
        tol = 1e-9
        res = smallest_eigenpairs(K, M, 8, tol=tol, seed=4,
                                  precond=laplacian_inverse(p))
        gram = res.vectors.T @ M.matvec(res.vectors)
        assert np.abs(gram - np.eye(8)).max() <= 100 * tol

    def test_determinism_bitwise(self):
        p = ElasticityProblem((PI, PI), 0.5, (12, 12))
        K, M, _ = assemble(p)
        precond = laplacian_inverse(p)
        a = smallest_eigenpairs(K, M, 5, tol=1e-9, seed=42, precond=precond)
        b = smallest_eigenpairs(K, M, 5, tol=1e-9, seed=42, precond=precond)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.vectors, b.vectors)

    def test_shift_invariance(self):
        p = ElasticityProblem((PI, PI), 0.5, (16, 16))
        K, M, _ = assemble(p)
        tol = 1e-9
        precond = laplacian_inverse(p)
        base = smallest_eigenpairs(K, M, 6, tol=tol, seed=9, precond=precond)
        shifted = smallest_eigenpairs(K.add_scaled(M, 1.0), M, 6, tol=tol,
                                      seed=9, precond=precond)
        assert np.all(np.abs(shifted.values - base.values - 1.0)
                      <= 20 * tol * shifted.values)

    def test_rejects_m_too_large(self):
        K = diag_csr(np.arange(1.0, 17.0))
        with pytest.raises(ValueError, match="order/4"):
            smallest_eigenpairs(K, identity_csr(16), 5)

    def test_indefinite_mass_rejected(self):
        K = diag_csr(np.arange(1.0, 21.0))
        M = diag_csr(np.concatenate([np.ones(10), -np.ones(10)]))
        with pytest.raises(IndefiniteMassError):
            smallest_eigenpairs(K, M, 2)

    def test_nonconvergence_carries_partial_result(self):
        n = 63
        h = PI / (n + 1)
        K = fd_laplacian_1d(n, h)
        with pytest.raises(ConvergenceError) as info:
            smallest_eigenpairs(K, identity_csr(n), 3, tol=1e-12, seed=5,
                                maxiter=2)
        partial = info.value.result
        assert isinstance(partial, EigenResult)
        assert not partial.converged.all()
        assert partial.iterations == 2
        assert str(info.value).count("tol")  # names the tolerance and indices


class TestBandedCholesky:
    def test_factor_matches_dense(self, rng):
        dense = rng.standard_normal((10, 10))
        dense = dense @ dense.T + 10 * np.eye(10)
        dense[np.abs(np.subtract.outer(np.arange(10), np.arange(10))) > 3] = 0
        dense = 0.5 * (dense + dense.T)
        A = BandedSymMatrix.from_dense(dense)
        L = cholesky_banded(A)
        b = rng.standard_normal((10, 2))
        x = L.solve(b)
        assert np.allclose(dense @ x, b, atol=1e-10)

    def test_singular_pivot_named(self):
        dense = np.diag([1.0, 1.0, 0.0, 1.0])
        A = BandedSymMatrix.from_dense(dense)
        with pytest.raises(FactorizationError, match="index 2"):
            cholesky_banded(A)


class TestBandedSmallest:
    def test_toeplitz_closed_form(self):
        n = 60
        dense = (np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1)
                 + np.diag(np.full(n - 1, -1.0), -1))
        A = BandedSymMatrix.from_dense(dense)
        res = banded_smallest(A, m=4, tol=1e-12)
        exact = 2.0 - 2.0 * np.cos(np.arange(1, 5) * PI / (n + 1))
        assert np.allclose(res.values, exact, rtol=1e-10)

    def test_generalized_fem_string(self):
        # P1 pencil on (0, pi): eigenvalues 6(1-cos jh)/(h^2 (2+cos jh))
        n = 40
        h = PI / (n + 1)
        stiff = (np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1)
                 + np.diag(np.full(n - 1, -1.0), -1)) / h
        mass = (np.diag(np.full(n, 4.0)) + np.diag(np.full(n - 1, 1.0), 1)
                + np.diag(np.full(n - 1, 1.0), -1)) * h / 6
        res = banded_smallest(BandedSymMatrix.from_dense(stiff),
                              BandedSymMatrix.from_dense(mass), m=3,
                              tol=1e-12)
        j = np.arange(1, 4)
        exact = 6 * (1 - np.cos(j * h)) / (h ** 2 * (2 + np.cos(j * h)))
        assert np.allclose(res.values, exact, rtol=1e-10)

    def test_identity_metric_default(self):
        dense = np.diag([4.0, 1.0, 9.0, 16.0, 25.0, 36.0, 49.0])
        res = banded_smallest(BandedSymMatrix.from_dense(dense), m=2,
                              tol=1e-12)
        assert np.allclose(res.values, [1.0, 4.0], atol=1e-10)

    def test_clamped_beam_constant(self):
        # squared second difference with reflected ghosts: the first
        # eigenvalue approaches mu^4 where cos(mu) cosh(mu) = 1
        from conftest import bisect
        mu = bisect(lambda t: np.cos(t) * np.cosh(t) - 1.0, 4.0, 5.5)
        target = mu ** 4  # 500.5639...
        assert target == pytest.approx(500.5639, abs=5e-3)
        errors = []
        for n_cells in (128, 256, 512):
            n = n_cells - 1
            h = 1.0 / n_cells
            d2 = (np.diag(np.full(n, 2.0))
                  + np.diag(np.full(n - 1, -1.0), 1)
                  + np.diag(np.full(n - 1, -1.0), -1)) / h ** 2
            biharm = d2 @ d2
            biharm[0, 0] += 1.0 / h ** 4   # ghost reflection u(-h) = u(h)
            biharm[-1, -1] += 1.0 / h ** 4
            A = BandedSymMatrix.from_dense(0.5 * (biharm + biharm.T))
            res = banded_smallest(A, m=1, tol=1e-12)
            errors.append(abs(res.values[0] - target))
        # the reflected-ghost boundary treatment is first order, so expect
        # steady but not quadratic approach
        assert errors[2] < errors[1] < errors[0]
        assert errors[2] < 1e-2 * target

    def test_shifted_factorisation_path(self):
        dense = np.diag([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        A = BandedSymMatrix.from_dense(dense)
        res = banded_smallest(A, m=2, tol=1e-12, shift=2.5)
        assert np.allclose(res.values, [1.0, 2.0], atol=1e-10)
