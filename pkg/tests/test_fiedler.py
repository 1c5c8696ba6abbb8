import numpy as np
import pytest
import scipy.sparse as sp

from macsparse.errors import DisconnectedGraph, NotPositiveDefinite, TooLarge
from macsparse.fiedler import (
    FiedlerSolver,
    default_shift,
    deflate,
    fiedler_dense_oracle,
    fiedler_shift_invert,
)
from macsparse.generate import chain_closures, grid2d
from macsparse.graph import Graph, build_laplacian
from oracles import dense_spectrum, random_connected_graph


def _complete(n):
    return Graph(n, [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)])


def _check_pair(L, pair):
    n = L.shape[0]
    q = pair.q2
    assert abs(np.linalg.norm(q) - 1) <= 1e-10
    assert abs(q.sum()) <= 1e-8 * np.sqrt(n)
    assert np.linalg.norm(L @ q - pair.lambda2 * q) <= 1e-8 * max(1.0, pair.lambda2)


@pytest.mark.parametrize("g,expected", [
    (_complete(5), 5.0),
    (_complete(8), 8.0),
    (Graph(3, [(0, 1, 1.0), (1, 2, 1.0)]), 1.0),
    (Graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]), 2.0),
    (Graph(6, [(0, k, 1.0) for k in range(1, 6)]), 1.0),
    (Graph(2, [(0, 1, 1.0)]), 2.0),
])
def test_analytic_values(g, expected):
    L = build_laplacian(g)
    pair = fiedler_shift_invert(L)
    assert pair.lambda2 == pytest.approx(expected, abs=1e-10)
    _check_pair(L, pair)


def test_grid_matches_closed_form():
    g, _ = grid2d(6, 9)
    pair = fiedler_shift_invert(build_laplacian(g))
    assert pair.lambda2 == pytest.approx(2 - 2 * np.cos(np.pi / 9), rel=1e-10)


@pytest.mark.parametrize("seed", range(12))
def test_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 120))
    g = random_connected_graph(rng, n, rng.uniform(2.0 / n, 0.3))
    L = build_laplacian(g)
    pair = fiedler_shift_invert(L)
    vals, vecs = dense_spectrum(L)
    assert abs(pair.lambda2 - vals[1]) <= 1e-8 * vals[1]
    if vals[2] - vals[1] > 1e-6:
        assert abs(pair.q2 @ vecs[:, 1]) >= 1 - 1e-6
    _check_pair(L, pair)


def test_shift_independence():
    rng = np.random.default_rng(5)
    g = random_connected_graph(rng, 150, 0.05)
    L = build_laplacian(g)
    dbar = L.diagonal().mean()
    lams = [fiedler_shift_invert(L, sigma=-f * dbar).lambda2 for f in (1e-6, 1e-3, 0.1)]
    assert max(lams) - min(lams) <= 1e-7 * lams[0]
    assert default_shift(L) == pytest.approx(-1e-3 * dbar)


def test_positive_shift_past_lambda2_not_factorizable():
    L = build_laplacian(_complete(4))
    with pytest.raises(NotPositiveDefinite):
        fiedler_shift_invert(L, sigma=0.5)


def test_disconnected_detected():
    g = Graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(DisconnectedGraph):
        fiedler_shift_invert(build_laplacian(g))
    with pytest.raises(DisconnectedGraph):
        fiedler_shift_invert(sp.csr_matrix((1, 1)))


def test_deflate_removes_mean():
    v = deflate(np.array([1.0, 2.0, 6.0]))
    assert v.sum() == pytest.approx(0.0, abs=1e-15)


def test_dense_oracle_size_limit():
    g, _ = grid2d(3, 3)
    with pytest.raises(TooLarge):
        fiedler_dense_oracle(build_laplacian(g), limit=5)


def test_pattern_mismatch_rejected():
    s = FiedlerSolver(build_laplacian(_complete(4)))
    with pytest.raises(ValueError):
        s.solve(build_laplacian(Graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])))


def test_warm_start_non_regression():
    g, fixed = chain_closures(300, 0.01, seed=3)
    rng = np.random.default_rng(0)
    L0 = build_laplacian(g)
    solver = FiedlerSolver(L0)
    w = g.w.copy()
    prev = solver.solve(L0)
    no_worse = steps = 0
    for _ in range(30):
        k = int(rng.integers(g.m))
        w[k] *= rng.uniform(0.5, 1.5)
        L = build_laplacian(Graph.from_arrays(g.n, g.u, g.v, w))
        cold = solver.solve(L)
        warm = solver.solve(L, x0=prev.q2)
        assert warm.lambda2 == pytest.approx(cold.lambda2, rel=1e-9)
        no_worse += warm.restarts <= cold.restarts
        steps += 1
        prev = warm
    print(f"warm start no worse on {no_worse}/{steps} steps")
    assert no_worse >= 0.9 * steps
