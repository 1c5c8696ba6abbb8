import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macsparse.errors import InputError
from macsparse.graph import (
    EdgePartition,
    Graph,
    LaplacianAssembler,
    WeightedEdge,
    build_laplacian,
    connected_components,
    edge_laplacian,
    is_laplacian,
    selection_laplacian,
)
from oracles import count_components, dense_laplacian, random_connected_graph


def test_single_edge_laplacian():
    L = build_laplacian(Graph(2, [(0, 1, 3.0)])).toarray()
    np.testing.assert_array_equal(L, [[3, -3], [-3, 3]])


def test_triangle_laplacian():
    L = build_laplacian(Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])).toarray()
    np.testing.assert_array_equal(np.diag(L), [2, 2, 2])
    off = L[~np.eye(3, dtype=bool)]
    np.testing.assert_array_equal(off, -np.ones(6))


def test_random_laplacian_matches_dense_assembly():
    rng = np.random.default_rng(0)
    g = random_connected_graph(rng, 50, 0.1)
    L = build_laplacian(g)
    np.testing.assert_allclose(L.toarray(), dense_laplacian(g.n, g.edges), rtol=0, atol=1e-14)
    assert np.all(np.abs(np.asarray(L.sum(axis=1)).ravel()) <= 1e-12 * abs(L).max())
    assert is_laplacian(L)


def test_edge_laplacian_entries():
    L = edge_laplacian(WeightedEdge(0, 1, 1.0), 3)
    assert L.nnz == 4
    d = L.todok()
    assert dict(d.items()) == {(0, 0): 1.0, (1, 1): 1.0, (0, 1): -1.0, (1, 0): -1.0}
    L2 = edge_laplacian(WeightedEdge(1, 2, 2.5), 4).toarray()
    assert L2[1, 1] == 2.5 and L2[2, 2] == 2.5


def test_edge_laplacian_out_of_range():
    with pytest.raises(InputError):
        edge_laplacian(WeightedEdge(0, 5, 1.0), 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 100), st.integers(0, 2**32 - 1))
def test_sum_of_edge_laplacians_is_laplacian(n, seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n, min(0.2, 4.0 / n))
    total = sum(edge_laplacian(e, n) for e in g.edges)
    L = build_laplacian(g)
    assert abs(total - L).max() <= 1e-13
    assert is_laplacian(L)
    coo = L.tocoo()
    assert np.all(coo.data[coo.row != coo.col] <= 0)
    assert abs(L - L.T).max() == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 100), st.integers(0, 2**32 - 1))
def test_smallest_eigenvalue_zero_with_constant_vector(n, seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n, min(0.2, 4.0 / n))
    vals, vecs = np.linalg.eigh(build_laplacian(g).toarray())
    assert abs(vals[0]) <= 1e-10 * max(1.0, vals[-1])
    ones = np.ones(n) / np.sqrt(n)
    assert abs(abs(vecs[:, 0] @ ones) - 1) <= 1e-8


def test_selection_laplacian_all_ones_and_zeros():
    rng = np.random.default_rng(1)
    g = random_connected_graph(rng, 12, 0.3)
    cands = [edge_laplacian(e, g.n) for e in g.edges]
    Lf = build_laplacian(Graph(g.n, []))
    full = selection_laplacian(Lf, cands, np.ones(g.m))
    assert abs(full - build_laplacian(g)).max() <= 1e-13
    tree = Graph(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.5)])
    extra = [edge_laplacian(WeightedEdge(0, 3, 1.0), 4)]
    L = selection_laplacian(build_laplacian(tree), extra, np.zeros(1))
    assert abs(L - build_laplacian(tree)).max() == 0


def test_selection_laplacian_fractional_matches_dense():
    g = Graph(5, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 4, 1.0), (0, 4, 3.0), (1, 3, 0.7)])
    x = np.array([0.2, 0.9, 0.4, 0.1, 0.6, 0.8])
    cands = [edge_laplacian(e, 5) for e in g.edges]
    L = selection_laplacian(build_laplacian(Graph(5, [])), cands, x)
    np.testing.assert_allclose(L.toarray(), dense_laplacian(5, g.edges, x), atol=1e-14)
    with pytest.raises(InputError):
        selection_laplacian(build_laplacian(Graph(5, [])), cands, x[:3])


def test_assembler_matches_selection_laplacian():
    rng = np.random.default_rng(2)
    g = random_connected_graph(rng, 30, 0.15)
    fixed = np.arange(0, g.m, 3)
    cand = np.setdiff1d(np.arange(g.m), fixed)
    asm = LaplacianAssembler(g, fixed, cand)
    x = rng.random(cand.size)
    xf = np.zeros(g.m)
    xf[fixed] = 1.0
    xf[cand] = x
    np.testing.assert_allclose(asm.matrix(x).toarray(), dense_laplacian(g.n, g.edges, xf),
                               atol=1e-13)
    # the pattern does not depend on x
    assert asm.matrix(np.zeros(cand.size)).nnz == asm.matrix(x).nnz


def test_connected_components_basic():
    tree = Graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    assert connected_components(tree)[0] == 1
    count, labels = connected_components(tree, active=[])
    assert count == 4
    np.testing.assert_array_equal(labels, [0, 1, 2, 3])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
def test_components_equal_zero_eigenvalue_multiplicity(n, seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n, min(0.2, 3.0 / n))
    active = np.flatnonzero(rng.random(g.m) < 0.5)
    count, _ = connected_components(g, active)
    L = dense_laplacian(n, [g.edges[k] for k in active])
    vals = np.linalg.eigvalsh(L)
    assert count == int(np.sum(vals < 1e-8))
    assert count == count_components(n, [g.edges[k] for k in active])


@pytest.mark.parametrize("edges", [
    [(0, 0, 1.0)],
    [(0, 3, 1.0)],
    [(0, 1, 0.0)],
    [(0, 1, -1.0)],
    [(0, 1, 1.0), (1, 0, 2.0)],
])
def test_invalid_graphs_rejected(edges):
    with pytest.raises(InputError):
        Graph(3, edges)


def test_partition_invariants():
    g = Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    p = EdgePartition([0], [1, 2], 1)
    p.check(g)
    with pytest.raises(InputError):
        EdgePartition([0], [0, 1], 1)
    with pytest.raises(InputError):
        EdgePartition([0], [1, 2], 3)
    with pytest.raises(InputError):
        EdgePartition([0], [1], 1).check(g)
    assert EdgePartition.all_candidate(g).K == 3
    assert EdgePartition.from_fixed(g, [2]).candidate.tolist() == [0, 1]
