"""Rounding a relaxed selection ``x`` to exactly ``K`` candidate edges.

Every strategy returns positions into the candidate list (the index space
of ``x``).  ``fixed`` edges, when given, are always present in the final
graph and count toward connectivity but never toward ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetMismatch, BudgetTooSmall, DisconnectedGraph, InfeasibleBudget
from .graph import EdgePartition, Graph

STRATEGIES = ("madow", "topk", "mst", "mst-madow")


@dataclass(frozen=True)
class RoundedSelection:
    chosen: np.ndarray  # sorted candidate positions
    strategy: str
    seed: int | None = None

    def __post_init__(self):
        chosen = np.sort(np.asarray(self.chosen, dtype=np.int64))
        chosen.setflags(write=False)
        object.__setattr__(self, "chosen", chosen)

    @property
    def K(self) -> int:
        return int(self.chosen.size)

    def indicator(self, m: int) -> np.ndarray:
        s = np.zeros(m)
        s[self.chosen] = 1.0
        return s


class UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n)
        self.rank = np.zeros(n, np.int64)
        self.count = n

    def find(self, a: int) -> int:
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return int(root)

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True


def round_topk(x, K: int) -> RoundedSelection:
    x = np.asarray(x, dtype=float)
    if not 0 <= K <= x.size:
        raise InfeasibleBudget(f"K={K} outside [0, {x.size}]")
    return RoundedSelection(np.argsort(-x, kind="stable")[:K], "topk")


def _capped_scale(y, target: float) -> np.ndarray:
    """Scale nonnegative ``y`` so that ``sum(min(1, s y)) == target``."""
    y = np.asarray(y, dtype=float)
    if target <= 0:
        return np.zeros_like(y)
    pos = y > 0
    if target >= pos.sum():
        return pos.astype(float)
    out = np.zeros_like(y)
    capped = np.zeros(y.size, bool)
    # water-filling: cap the largest entries until the rest fit below one
    for _ in range(y.size + 1):
        free = pos & ~capped
        scale = (target - capped.sum()) / y[free].sum()
        over = free & (scale * y > 1.0)
        if not over.any():
            out[free] = scale * y[free]
            out[capped] = 1.0
            return out
        capped |= over
    raise AssertionError("capped rescaling did not settle")


def _check_budget_sum(x, K: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        raise BudgetMismatch("selection weights must lie in [0, 1]")
    x = np.clip(x, 0.0, 1.0)
    total = x.sum()
    drift = abs(total - K)
    if drift > 1e-6 * max(K, 1):
        raise BudgetMismatch(f"weights sum to {total!r}, expected K={K}")
    if drift > 0 and K > 0:
        x = _capped_scale(x, K)
    return x


def madow_select(x, K: int, U: float) -> np.ndarray:
    """Systematic sample: boolean mask of the ``K`` positions hit by ``U + i``.

    Position ``k`` is chosen when some integer ``i`` in ``[0, K)`` has
    ``c_{k-1} <= U + i < c_k`` for the cumulative sums ``c`` of ``x``.
    Entries equal to one are always chosen.
    """
    x = np.asarray(x, dtype=float)
    if not 0.0 <= U < 1.0:
        raise ValueError("U must lie in [0, 1)")
    forced = x >= 1.0
    mask = forced.copy()
    rest = np.flatnonzero(~forced)
    K_rest = K - int(forced.sum())
    if K_rest <= 0 or rest.size == 0:
        return mask
    c = np.concatenate([[0.0], np.cumsum(x[rest])])
    c[-1] = K_rest
    hits = np.diff(np.ceil(c - U))
    if hits.sum() != K_rest or np.any(hits > 1):
        raise AssertionError("systematic sample miscounted")
    mask[rest[hits > 0]] = True
    return mask


def round_madow(x, K: int, seed: int | None = 0, U: float | None = None) -> RoundedSelection:
    """Madow systematic sampling with inclusion probabilities ``x``.

    Sums off by at most ``1e-6 K`` are rescaled; larger drift raises
    ``BudgetMismatch``.  ``U`` overrides the random offset.
    """
    x = _check_budget_sum(x, K)
    if U is None:
        U = float(np.random.default_rng(seed).random())
    chosen = np.flatnonzero(madow_select(x, K, U))
    assert chosen.size == K
    return RoundedSelection(chosen, "madow", seed)


def maximum_spanning_tree(g: Graph, weights, restrict=None, preconnected=None) -> np.ndarray:
    """Kruskal maximum spanning tree (or forest completion) of ``g``.

    ``weights`` has one entry per edge of ``g``; only edges in ``restrict``
    (default: all) are eligible.  ``preconnected`` edges are merged first
    and are not part of the output, so the result completes them to a
    spanning connected graph.  Ties go to the lower edge index.

    Returns the chosen edge indices in selection order.
    """
    w = np.asarray(weights, dtype=float)
    if w.size != g.m:
        raise ValueError(f"expected {g.m} weights, got {w.size}")
    idx = np.arange(g.m) if restrict is None else np.asarray(restrict, dtype=np.int64)
    uf = UnionFind(g.n)
    if preconnected is not None:
        for k in np.asarray(preconnected, dtype=np.int64):
            uf.union(int(g.u[k]), int(g.v[k]))
    order = idx[np.argsort(-w[idx], kind="stable")]
    chosen = []
    for k in order:
        if uf.count == 1:
            break
        if uf.union(int(g.u[k]), int(g.v[k])):
            chosen.append(int(k))
    if uf.count > 1:
        labels = np.array([uf.find(i) for i in range(g.n)])
        raise DisconnectedGraph(f"eligible edges leave {uf.count} components",
                                components=np.unique(labels, return_inverse=True)[1])
    return np.asarray(chosen, dtype=np.int64)


def _candidate_view(g: Graph, x, partition: EdgePartition | None):
    x = np.asarray(x, dtype=float)
    if partition is None:
        cand = np.arange(g.m)
        fixed = np.empty(0, np.int64)
    else:
        cand, fixed = partition.candidate, partition.fixed
    if x.size != cand.size:
        raise ValueError(f"expected {cand.size} selection weights, got {x.size}")
    return x, cand, fixed


def _tree_part(g: Graph, x, K: int, partition):
    x, cand, fixed = _candidate_view(g, x, partition)
    if not 0 <= K <= cand.size:
        raise InfeasibleBudget(f"K={K} outside [0, {cand.size}]")
    w = np.zeros(g.m)
    w[cand] = x
    tree_edges = maximum_spanning_tree(g, w, restrict=cand, preconnected=fixed)
    if tree_edges.size > K:
        raise BudgetTooSmall(
            f"connectivity needs {tree_edges.size} candidate edges but K={K}")
    pos = np.full(g.m, -1, np.int64)
    pos[cand] = np.arange(cand.size)
    return x, pos[tree_edges]


def round_mst_connected(g: Graph, x, K: int, partition: EdgePartition | None = None
                        ) -> RoundedSelection:
    """Maximum spanning tree under weights ``x`` plus the top remaining ``x``.

    Maximizes ``sum(x[chosen])`` over ``K``-subsets that connect the graph
    together with the fixed edges.
    """
    x, tree = _tree_part(g, x, K, partition)
    rest = np.setdiff1d(np.arange(x.size), tree)
    extra = rest[np.argsort(-x[rest], kind="stable")[:K - tree.size]]
    return RoundedSelection(np.concatenate([tree, extra]), "mst")


def round_mst_madow(g: Graph, x, K: int, seed: int | None = 0,
                    partition: EdgePartition | None = None) -> RoundedSelection:
    """Maximum spanning tree under ``x``, then Madow sampling for the rest.

    The remaining weights are rescaled (with a cap at one) to sum to the
    leftover budget.  When too little positive weight remains, every
    positive entry is taken and the rest of the budget is sampled with
    uniform weights over the zero entries.
    """
    x, tree = _tree_part(g, x, K, partition)
    rest = np.setdiff1d(np.arange(x.size), tree)
    k_rest = K - tree.size
    if k_rest == 0:
        return RoundedSelection(tree, "mst-madow", seed)
    y = np.clip(x[rest], 0.0, 1.0)
    U = float(np.random.default_rng(seed).random())
    positive = np.flatnonzero(y > 0)
    if positive.size <= k_rest:
        zeros = np.flatnonzero(y == 0)
        k_zero = k_rest - positive.size
        uniform = np.full(zeros.size, k_zero / zeros.size) if zeros.size else zeros
        picked = zeros[madow_select(uniform, k_zero, U)] if k_zero else zeros[:0]
        extra = rest[np.sort(np.concatenate([positive, picked]))]
        return RoundedSelection(np.concatenate([tree, extra]), "mst-madow", seed)
    y = _capped_scale(y, k_rest)
    extra = rest[madow_select(y, k_rest, U)]
    return RoundedSelection(np.concatenate([tree, extra]), "mst-madow", seed)


def round_selection(strategy: str, g: Graph, x, K: int, seed: int | None = 0,
                    partition: EdgePartition | None = None) -> RoundedSelection:
    """Dispatch by strategy name (``madow``, ``topk``, ``mst``, ``mst-madow``)."""
    if strategy == "madow":
        return round_madow(x, K, seed)
    if strategy == "topk":
        return round_topk(x, K)
    if strategy == "mst":
        return round_mst_connected(g, x, K, partition)
    if strategy == "mst-madow":
        return round_mst_madow(g, x, K, seed, partition)
    raise ValueError(f"unknown rounding strategy {strategy!r}; choose from {STRATEGIES}")
