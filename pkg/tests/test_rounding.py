import numpy as np
import pytest

from macsparse.errors import BudgetMismatch, BudgetTooSmall, DisconnectedGraph
from macsparse.graph import EdgePartition, Graph
from macsparse.rounding import (
    madow_select,
    maximum_spanning_tree,
    round_madow,
    round_mst_connected,
    round_mst_madow,
    round_selection,
    round_topk,
)
from oracles import (
    best_connected_subset,
    count_components,
    random_connected_graph,
    small_instance,
    spanning_trees,
)


def _budget_vector(rng, m, K):
    x = rng.random(m)
    for _ in range(100):
        x = np.minimum(1.0, x * (K / x.sum()))
        if abs(x.sum() - K) < 1e-13:
            break
    return x


def test_two_edge_split():
    x = np.array([0.5, 0.5])
    assert round_madow(x, 1, U=0.25).chosen.tolist() == [0]
    assert round_madow(x, 1, U=0.75).chosen.tolist() == [1]


def test_ones_are_always_chosen():
    x = np.array([1.0, 0.25, 0.25, 0.5, 1.0])
    for U in np.linspace(0, 0.99, 23):
        chosen = round_madow(x, 3, U=U).chosen
        assert {0, 4} <= set(chosen.tolist()) and chosen.size == 3


def test_marginals_match_weights():
    rng = np.random.default_rng(0)
    m, K, draws = 20, 7, 20000
    x = _budget_vector(rng, m, K)
    counts = np.zeros(m)
    for U in rng.random(draws):
        mask = madow_select(x, K, U)
        assert mask.sum() == K
        counts += mask
    sd = np.sqrt(draws * x * (1 - x))
    assert np.all(np.abs(counts - draws * x) <= 4 * sd + 1e-9)


def test_sum_drift_handling():
    x = np.array([0.5, 0.5, 0.5, 0.5]) * (1 + 1e-8)
    assert round_madow(x, 2).K == 2
    with pytest.raises(BudgetMismatch):
        round_madow(np.array([0.5, 0.5, 0.6]), 1)
    with pytest.raises(BudgetMismatch):
        round_madow(np.array([1.5, 0.5]), 2)


def test_madow_seeded_determinism():
    x = np.full(10, 0.3)
    assert round_madow(x, 3, seed=4).chosen.tolist() == round_madow(x, 3, seed=4).chosen.tolist()


def test_topk():
    assert round_topk([0.2, 0.9, 0.9, 0.1], 2).chosen.tolist() == [1, 2]
    assert round_topk([0.5, 0.5, 0.5], 1).chosen.tolist() == [0]


def test_mst_unit_triangle_takes_lowest_indices():
    g = Graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    assert sorted(maximum_spanning_tree(g, np.ones(3)).tolist()) == [0, 1]


def test_mst_weight_is_optimal_against_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(15):
        g = random_connected_graph(rng, int(rng.integers(3, 7)), 0.5)
        w = np.round(rng.random(g.m), 2)
        tree = maximum_spanning_tree(g, w)
        assert tree.size == g.n - 1
        assert count_components(g.n, [g.edges[k] for k in tree]) == 1
        best = max(sum(w[list(t)]) for t in spanning_trees(g))
        assert w[tree].sum() == pytest.approx(best, abs=1e-12)


def test_mst_disconnected():
    g = Graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(DisconnectedGraph):
        maximum_spanning_tree(g, np.ones(2))


def test_mst_rounding_connected_with_exact_count():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(3, 30))
        g = random_connected_graph(rng, n, 0.3)
        K = int(rng.integers(n - 1, g.m + 1))
        x = _budget_vector(rng, g.m, K)
        for sel in (round_mst_connected(g, x, K), round_mst_madow(g, x, K, seed=3)):
            assert sel.K == K
            assert count_components(n, [g.edges[k] for k in sel.chosen]) == 1


def test_mst_rounding_optimal_on_small_instances():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 40:
        g, part = small_instance(rng)
        x = _budget_vector(rng, part.candidate.size, part.K)
        try:
            sel = round_mst_connected(g, x, part.K, part)
        except BudgetTooSmall:
            continue
        edges = [g.edges[k] for k in part.fixed] + [g.edges[part.candidate[j]] for j in sel.chosen]
        assert count_components(g.n, edges) == 1
        assert x[sel.chosen].sum() == pytest.approx(best_connected_subset(g, part, x), abs=1e-12)
        checked += 1


def test_mst_budget_too_small():
    g = Graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])
    with pytest.raises(BudgetTooSmall):
        round_mst_connected(g, np.full(4, 0.5), 2)


def test_mst_madow_zero_residual_is_sampled_uniformly():
    # path plus two chords; x puts no weight outside the tree
    g = Graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 2, 1.0), (1, 3, 1.0)])
    x = np.array([1.0, 1.0, 1.0, 0.0, 0.0])
    seen = set()
    for seed in range(40):
        sel = round_mst_madow(g, x, 4, seed=seed)
        assert sel.K == 4 and {0, 1, 2} <= set(sel.chosen.tolist())
        seen.add(tuple(sel.chosen.tolist()))
    assert len(seen) == 2


def test_fixed_edges_count_toward_connectivity():
    g = Graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 2, 1.0), (1, 3, 1.0)])
    part = EdgePartition([0, 1], [2, 3, 4], 1)
    sel = round_mst_connected(g, np.array([0.2, 0.3, 0.5]), 1, part)
    assert sel.chosen.tolist() == [2]


def test_dispatch():
    x = np.array([0.5, 0.5])
    g = Graph(2, [(0, 1, 1.0)])
    assert round_selection("topk", g, x, 1).strategy == "topk"
    with pytest.raises(ValueError):
        round_selection("pipage", g, x, 1)
