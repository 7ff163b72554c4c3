import numpy as np
import pytest
import scipy.sparse as sp

from pnpflow import BoundarySpec, Grid
from pnpflow.errors import ConvergenceError, ZeroPivotError
from pnpflow.linalg import ILU0, Jacobi, gmres, pcg, preconditioner
from pnpflow.operators import laplacian_system


def dirichlet_laplacian(n=4):
    return laplacian_system(Grid(n, n), 1.0, BoundarySpec.dirichlet(0.0))[0].tocsr()


class TestILU0:
    def test_diagonal_exact(self, rng):
        d = rng.uniform(1, 5, 10)
        M = ILU0(sp.diags(d).tocsr())
        b = rng.normal(size=10)
        np.testing.assert_allclose(M.solve(b), b / d, rtol=1e-14)

    def test_triangular_reproduced(self, rng):
        A = sp.tril(sp.random(12, 12, density=0.3, random_state=1), k=-1) + sp.diags(rng.uniform(1, 2, 12))
        A = A.tocsr()
        L, U = ILU0(A).factors()
        np.testing.assert_allclose((L @ U).toarray(), A.toarray(), atol=1e-14)
        x, info = gmres(A, rng.normal(size=12), ILU0(A), tol=1e-12)
        assert info["iterations"] == 1

    def test_pattern_preserved(self):
        A = dirichlet_laplacian(5)
        L, U = ILU0(A).factors()
        outside = A.toarray() == 0
        assert not np.any((L + U).toarray()[outside])

    def test_zero_pivot_falls_back(self):
        A = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(ZeroPivotError):
            ILU0(A)
        with pytest.raises(ZeroPivotError):
            preconditioner(A)  # Jacobi also needs a nonzero diagonal

    def test_fallback_to_jacobi(self):
        # positive diagonal but elimination creates a zero pivot
        A = sp.csr_matrix(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 2.0]]))
        assert isinstance(preconditioner(A), Jacobi)

    def test_reduces_iterations(self, rng):
        A = dirichlet_laplacian(4)
        b = rng.normal(size=A.shape[0])
        _, plain = gmres(A, b, None, tol=1e-10)
        _, prec = gmres(A, b, ILU0(A), tol=1e-10)
        assert prec["iterations"] < plain["iterations"]
        _, cg_plain = pcg(A, b, None, tol=1e-10)
        _, cg_prec = pcg(A, b, ILU0(A), tol=1e-10)
        assert cg_prec["iterations"] < cg_plain["iterations"]


class TestGMRES:
    def test_zero_rhs(self):
        A = dirichlet_laplacian()
        x, info = gmres(A, np.zeros(A.shape[0]))
        assert info["iterations"] == 0 and not np.any(x)

    def test_identity(self, rng):
        b = rng.normal(size=7)
        x, info = gmres(sp.identity(7, format="csr"), b)
        np.testing.assert_allclose(x, b)
        assert info["iterations"] == 1

    def test_random_sparse(self, rng):
        A = sp.random(50, 50, density=0.1, random_state=3) + 4 * sp.identity(50)
        A = A.tocsr()
        b = rng.normal(size=50)
        x, _ = gmres(A, b, preconditioner(A), tol=1e-6)
        assert np.linalg.norm(A @ x - b) <= 1e-6 * np.linalg.norm(b)

    def test_restart(self, rng):
        A = dirichlet_laplacian(8)
        b = rng.normal(size=A.shape[0])
        x, info = gmres(A, b, None, tol=1e-10, restart=5, maxiter=2000)
        assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)
        assert info["iterations"] > 5

    def test_failure_carries_best_iterate(self, rng):
        A = dirichlet_laplacian(8)
        b = rng.normal(size=A.shape[0])
        with pytest.raises(ConvergenceError) as exc:
            gmres(A, b, None, tol=1e-14, restart=3, maxiter=6)
        assert exc.value.x is not None and exc.value.history
        assert np.linalg.norm(A @ exc.value.x - b) < np.linalg.norm(b)


class TestPCG:
    def test_singular_mean_zero(self, rng):
        A = laplacian_system(Grid(6, 6), 1.0, BoundarySpec.periodic())[0].tocsr()
        b = rng.normal(size=36)
        b -= b.mean()
        x, _ = pcg(A, b, None, project_mean=True)
        assert abs(x.mean()) < 1e-13
        assert np.linalg.norm(A @ x - b) <= 1e-9 * np.linalg.norm(b)
