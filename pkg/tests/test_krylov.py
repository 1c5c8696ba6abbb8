import numpy as np
import pytest

from macsparse.errors import NoConvergence
from macsparse.fiedler import krylov_schur


def test_small_diagonal():
    D = np.array([5.0, 2.0, 1.0])
    res = krylov_schur(lambda v: D * v, np.ones(3), m=3, k=1)
    assert res.ritz_values[0] == pytest.approx(5.0, abs=1e-12)
    assert abs(abs(res.ritz_vectors[0, 0]) - 1) < 1e-10


def test_random_symmetric_top_two():
    rng = np.random.default_rng(0)
    n = 80
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    ev = np.linspace(1.0, 10.0, n)
    ev[-1], ev[-2] = 40.0, 30.0
    A = (Q * ev) @ Q.T
    res = krylov_schur(lambda v: A @ v, rng.standard_normal(n), m=20, k=2, tol=1e-12)
    np.testing.assert_allclose(res.ritz_values, [40.0, 30.0], rtol=1e-10)
    for j, lam in enumerate(res.ritz_values):
        y = res.ritz_vectors[:, j]
        assert np.linalg.norm(A @ y - lam * y) <= 1e-9 * lam


def test_start_vector_orthogonal_to_dominant_direction():
    D = np.array([10.0, 3.0, 2.0, 1.0, 0.5, 0.25])
    v0 = np.array([0.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    res = krylov_schur(lambda v: D * v, v0, m=4, k=1, verify=True,
                       rng=np.random.default_rng(1))
    assert res.ritz_values[0] == pytest.approx(10.0, rel=1e-10)


def test_zero_start_rejected():
    with pytest.raises(ValueError):
        krylov_schur(lambda v: v, np.zeros(4), m=3)


def test_restart_limit():
    rng = np.random.default_rng(2)
    D = 1.0 + 1e-9 * np.arange(200)
    with pytest.raises(NoConvergence):
        krylov_schur(lambda v: D * v, rng.standard_normal(200), m=4, k=1, tol=1e-15,
                     max_restarts=2)
