"""Independent reference computations used by the tests.

Everything here is deliberately naive (dense matrices, loops, exhaustive
enumeration) so it shares no code path with the package under test.
"""

from __future__ import annotations

import itertools

import numpy as np

from macsparse.graph import EdgePartition, Graph


def dense_laplacian(n, edges, x=None):
    L = np.zeros((n, n))
    for k, (a, b, w) in enumerate(edges):
        s = w if x is None else w * x[k]
        L[a, a] += s
        L[b, b] += s
        L[a, b] -= s
        L[b, a] -= s
    return L


def dense_spectrum(L):
    L = L.toarray() if hasattr(L, "toarray") else np.asarray(L)
    return np.linalg.eigh(L)


def dense_lambda2(L) -> float:
    return float(dense_spectrum(L)[0][1])


def random_connected_graph(rng, n, density=0.2, wlo=0.1, whi=2.0) -> Graph:
    """Random spanning tree plus Erdos-Renyi extras, shuffled edge order."""
    pairs = set()
    perm = rng.permutation(n)
    for i in range(1, n):
        a, b = perm[i], perm[rng.integers(0, i)]
        pairs.add((min(a, b), max(a, b)))
    iu, ju = np.triu_indices(n, 1)
    extra = rng.random(iu.size) < density
    pairs.update(zip(iu[extra].tolist(), ju[extra].tolist()))
    pairs = sorted((int(a), int(b)) for a, b in pairs)
    order = rng.permutation(len(pairs))
    return Graph(n, [(pairs[k][0], pairs[k][1], float(rng.uniform(wlo, whi))) for k in order])


def count_components(n, edges) -> int:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for a, b, *_ in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(n)})


def brute_force_best(g: Graph, part: EdgePartition):
    """Best integral ``lambda_2`` over all K-subsets of the candidates."""
    fixed = [g.edges[k] for k in part.fixed]
    best, arg = -np.inf, None
    for combo in itertools.combinations(part.candidate.tolist(), part.K):
        edges = fixed + [g.edges[k] for k in combo]
        lam = dense_lambda2(dense_laplacian(g.n, edges))
        if lam > best:
            best, arg = lam, combo
    return best, arg


def spanning_trees(g: Graph):
    for combo in itertools.combinations(range(g.m), g.n - 1):
        if count_components(g.n, [g.edges[k] for k in combo]) == 1:
            yield combo


def best_connected_subset(g: Graph, part: EdgePartition, x) -> float:
    """``max sum x`` over K-subsets of candidates that connect with the fixed edges."""
    fixed = [g.edges[k] for k in part.fixed]
    best = -np.inf
    for combo in itertools.combinations(range(part.candidate.size), part.K):
        edges = fixed + [g.edges[part.candidate[j]] for j in combo]
        if count_components(g.n, edges) == 1:
            best = max(best, float(sum(x[j] for j in combo)))
    return best


def is_bridge(g: Graph, k: int) -> bool:
    rest = [e for j, e in enumerate(g.edges) if j != k]
    return count_components(g.n, rest) > count_components(g.n, g.edges)


def pinv_resistance(g: Graph):
    Lp = np.linalg.pinv(dense_laplacian(g.n, g.edges))
    return np.array([Lp[a, a] + Lp[b, b] - 2 * Lp[a, b] for a, b, _ in g.edges])


def small_instance(rng, n=None, m_c_max=10, with_fixed=None):
    """Tiny connected instance with an optional spanning-path backbone."""
    n = int(rng.integers(4, 7)) if n is None else n
    with_fixed = bool(rng.integers(0, 2)) if with_fixed is None else with_fixed
    chain = [(i, i + 1) for i in range(n - 1)]
    others = [p for p in itertools.combinations(range(n), 2) if p not in chain]
    rng.shuffle(others)
    if with_fixed:
        edges = chain + others[:m_c_max]
        fixed = list(range(n - 1))
    else:
        edges = chain + others[:m_c_max - (n - 1)]
        order = rng.permutation(len(edges))
        edges = [edges[k] for k in order]
        fixed = []
    g = Graph(n, [(a, b, float(rng.uniform(0.2, 2.0))) for a, b in edges])
    cand = np.setdiff1d(np.arange(g.m), fixed)
    k_min = 1 if with_fixed else n - 1
    K = int(rng.integers(k_min, cand.size))
    return g, EdgePartition(fixed, cand, K)


def mp_lambda2(n, edges, x=None, dps=40) -> float:
    """Extended-precision ``lambda_2`` for finite-difference checks."""
    import mpmath

    with mpmath.workdps(dps):
        L = mpmath.zeros(n, n)
        for k, (a, b, w) in enumerate(edges):
            s = mpmath.mpf(w) * (1 if x is None else mpmath.mpf(x[k]))
            L[a, a] += s
            L[b, b] += s
            L[a, b] -= s
            L[b, a] -= s
        vals = sorted(mpmath.eigsy(L, eigvals_only=True))
        return vals[1]
