import numpy as np
import pytest
import scipy.sparse as sp

from macsparse.errors import NotPositiveDefinite
from macsparse.fiedler import SymbolicCholesky, amd_ordering, sparse_cholesky
from macsparse.generate import grid2d
from macsparse.graph import build_laplacian


def _shifted(L, s=1e-2):
    return (L + s * sp.identity(L.shape[0])).tocsr()


def test_amd_returns_permutation():
    g, _ = grid2d(7, 9)
    p = amd_ordering(build_laplacian(g))
    assert sorted(p.tolist()) == list(range(g.n))


def test_path_graph_factor_has_no_fill():
    n = 30
    A = sp.diags([-np.ones(n - 1), 2.1 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()
    f = sparse_cholesky(A, perm=np.arange(n))
    assert f.nnz == 2 * n - 1
    f2 = sparse_cholesky(A)
    assert f2.nnz == 2 * n - 1


def test_amd_reduces_fill_on_grid():
    g, _ = grid2d(20, 20)
    A = _shifted(build_laplacian(g))
    natural = SymbolicCholesky(A, np.arange(g.n)).nnz_factor
    amd = SymbolicCholesky(A, amd_ordering(A)).nnz_factor
    assert amd < natural


def test_scaled_identity():
    f = sparse_cholesky(sp.identity(4, format="csr") * 4.0)
    np.testing.assert_allclose(f.L.toarray(), 2.0 * np.eye(4))


def test_two_by_two():
    A = sp.csr_matrix(np.array([[4.0, 2.0], [2.0, 3.0]]))
    f = sparse_cholesky(A, perm=np.arange(2))
    np.testing.assert_allclose(f.L.toarray(), [[2.0, 0.0], [1.0, np.sqrt(2.0)]], atol=1e-15)


def test_random_spd_reconstruction_and_solve():
    rng = np.random.default_rng(3)
    n = 100
    B = sp.random(n, n, density=0.03, random_state=4)
    A = (B @ B.T + sp.identity(n) * 0.5).tocsr()
    f = sparse_cholesky(A)
    Ap = A.toarray()[np.ix_(f.perm, f.perm)]
    Ld = f.L.toarray()
    np.testing.assert_allclose(Ld @ Ld.T, Ap, atol=1e-12 * np.abs(Ap).max())
    b = rng.standard_normal(n)
    np.testing.assert_allclose(A @ f.solve(b), b, atol=1e-10)


def test_refactor_reuses_symbolic_phase():
    g, _ = grid2d(6, 6)
    L = build_laplacian(g)
    sym = SymbolicCholesky(L, amd_ordering(L))
    rng = np.random.default_rng(0)
    for _ in range(3):
        data = L.data * rng.uniform(0.5, 2.0)
        f = sym.factorize(data, shift=-0.1)
        M = sp.csr_matrix((data, L.indices, L.indptr), shape=L.shape) + 0.1 * sp.identity(g.n)
        b = rng.standard_normal(g.n)
        np.testing.assert_allclose(M @ f.solve(b), b, atol=1e-9)


def test_indefinite_raises_with_column():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotPositiveDefinite) as err:
        sparse_cholesky(A, perm=np.arange(2))
    assert err.value.column == 1
    with pytest.raises(NotPositiveDefinite):
        sparse_cholesky(build_laplacian(grid2d(3, 3)[0]))
