"""Weighted graphs, edge partitions and Laplacian assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numba
import numpy as np
import scipy.sparse as sp

from .errors import InputError


class WeightedEdge(NamedTuple):
    u: int
    v: int
    weight: float


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with positive edge weights.

    Edge order is significant: position ``k`` in ``edges`` is the edge
    index used by every downstream vector.  ``labels[i]`` is the original
    identifier of node ``i`` (identity when not given).
    """

    n: int
    edges: tuple[WeightedEdge, ...]
    labels: tuple = None
    u: np.ndarray = field(init=False, repr=False)
    v: np.ndarray = field(init=False, repr=False)
    w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = tuple(WeightedEdge(int(a), int(b), float(c)) for a, b, c in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n < 0:
            raise InputError("node count must be nonnegative")
        seen = set()
        for k, (a, b, wt) in enumerate(edges):
            if a == b:
                raise InputError(f"edge {k}: self-loop on node {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InputError(f"edge {k}: node id out of range [0, {self.n})")
            if not wt > 0 or not np.isfinite(wt):
                raise InputError(f"edge {k}: weight must be positive, got {wt}")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise InputError(f"edge {k}: duplicate edge {key}")
            seen.add(key)
        labels = tuple(range(self.n)) if self.labels is None else tuple(self.labels)
        if len(labels) != self.n:
            raise InputError("labels must have one entry per node")
        object.__setattr__(self, "labels", labels)
        m = len(edges)
        u = np.fromiter((e.u for e in edges), dtype=np.int64, count=m)
        v = np.fromiter((e.v for e in edges), dtype=np.int64, count=m)
        w = np.fromiter((e.weight for e in edges), dtype=np.float64, count=m)
        for arr in (u, v, w):
            arr.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @property
    def m(self) -> int:
        return len(self.edges)

    @classmethod
    def from_arrays(cls, n, u, v, w, labels=None) -> "Graph":
        return cls(n, tuple(zip(np.asarray(u).tolist(), np.asarray(v).tolist(),
                                np.asarray(w, dtype=float).tolist())), labels)

    def subgraph(self, edge_indices) -> "Graph":
        """Graph on the same nodes keeping only ``edge_indices`` (in that order)."""
        idx = np.asarray(edge_indices, dtype=np.int64)
        return Graph(self.n, tuple(self.edges[k] for k in idx), self.labels)


@dataclass(frozen=True, eq=False)
class EdgePartition:
    """Split of the edge indices into fixed and candidate sets with budget ``K``."""

    fixed: np.ndarray
    candidate: np.ndarray
    K: int

    def __post_init__(self):
        fixed = np.unique(np.asarray(self.fixed, dtype=np.int64))
        cand = np.unique(np.asarray(self.candidate, dtype=np.int64))
        if np.intersect1d(fixed, cand).size:
            raise InputError("fixed and candidate edge sets overlap")
        if not 0 <= self.K <= cand.size:
            raise InputError(f"budget K={self.K} outside [0, {cand.size}]")
        fixed.setflags(write=False)
        cand.setflags(write=False)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "candidate", cand)
        object.__setattr__(self, "K", int(self.K))

    def check(self, g: Graph) -> None:
        allidx = np.concatenate([self.fixed, self.candidate])
        if allidx.size != g.m or np.any(np.sort(allidx) != np.arange(g.m)):
            raise InputError("partition does not cover the graph's edges exactly")

    def with_budget(self, K: int) -> "EdgePartition":
        return EdgePartition(self.fixed, self.candidate, K)

    @classmethod
    def all_candidate(cls, g: Graph, K: int | None = None) -> "EdgePartition":
        return cls(np.empty(0, np.int64), np.arange(g.m), g.m if K is None else K)

    @classmethod
    def from_fixed(cls, g: Graph, fixed, K: int | None = None) -> "EdgePartition":
        fixed = np.unique(np.asarray(fixed, dtype=np.int64))
        cand = np.setdiff1d(np.arange(g.m), fixed)
        return cls(fixed, cand, cand.size if K is None else K)


def _laplacian_from_arrays(n, u, v, w) -> sp.csr_matrix:
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    rows = np.concatenate([u, v, u, v])
    cols = np.concatenate([u, v, v, u])
    vals = np.concatenate([w, w, -w, -w])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    L.sum_duplicates()
    L.sort_indices()
    return L


def build_laplacian(g: Graph) -> sp.csr_matrix:
    return _laplacian_from_arrays(g.n, g.u, g.v, g.w)


def edge_laplacian(e: WeightedEdge, n: int) -> sp.csr_matrix:
    """Rank-one Laplacian ``w (e_u - e_v)(e_u - e_v)^T`` of a single edge."""
    u, v, w = e
    if not (0 <= u < n and 0 <= v < n):
        raise InputError(f"edge ({u}, {v}) out of range for n={n}")
    return _laplacian_from_arrays(n, [u], [v], [w])


def selection_laplacian(fixed_L, candidates: Sequence, x) -> sp.csr_matrix:
    """``L_f + sum_k x_k L_k`` for explicit per-candidate Laplacians."""
    x = np.asarray(x, dtype=float)
    if len(candidates) != x.size:
        raise InputError(f"got {x.size} weights for {len(candidates)} candidate Laplacians")
    L = sp.csr_matrix(fixed_L, dtype=float, copy=True)
    for xk, Lk in zip(x, candidates):
        if Lk.shape != L.shape:
            raise InputError(f"dimension mismatch: {Lk.shape} vs {L.shape}")
        if xk != 0.0:
            L = L + xk * Lk
    return L.tocsr()


def is_laplacian(L, rtol=1e-12) -> bool:
    """Symmetric, zero row sums, nonpositive off-diagonal, nonnegative diagonal."""
    L = sp.csr_matrix(L)
    if L.shape[0] != L.shape[1]:
        return False
    if abs(L - L.T).max() if L.nnz else 0.0:
        return False
    scale = abs(L).max() if L.nnz else 0.0
    if np.any(np.abs(np.asarray(L.sum(axis=1)).ravel()) > rtol * max(scale, 1.0)):
        return False
    coo = L.tocoo()
    off = coo.row != coo.col
    if np.any(coo.data[off] > 0):
        return False
    return bool(np.all(L.diagonal() >= 0))


def connected_components(g: Graph, active=None) -> tuple[int, np.ndarray]:
    """Component count and per-node labels of the subgraph on ``active`` edges.

    ``active`` is an iterable of edge indices (all edges when ``None``).
    Labels are numbered in order of each component's lowest node.
    """
    if active is None:
        idx = np.arange(g.m)
    else:
        idx = np.asarray(sorted(set(int(k) for k in active)), dtype=np.int64)
    return components_from_arrays(g.n, g.u[idx], g.v[idx])


@numba.njit(cache=True)
def _union_find_labels(n, u, v):
    parent = np.arange(n)
    for k in range(u.size):
        a = u[k]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = v[k]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    # number components by their lowest node
    labels = np.empty(n, np.int64)
    count = 0
    for i in range(n):
        r = i
        while parent[r] != r:
            r = parent[r]
        if r == i:
            labels[i] = count
            count += 1
        else:
            labels[i] = labels[r]
    return count, labels


def components_from_arrays(n, u, v) -> tuple[int, np.ndarray]:
    if n == 0:
        return 0, np.empty(0, np.int64)
    count, labels = _union_find_labels(int(n), np.asarray(u, dtype=np.int64),
                                       np.asarray(v, dtype=np.int64))
    return int(count), labels


class LaplacianAssembler:
    """Fast assembly of ``L(x) = L_f + sum_k x_k L_k`` on a fixed pattern.

    The sparsity pattern covers every fixed and candidate edge (zero
    weights included), so it does not change as ``x`` varies; solvers
    keyed on the pattern can reuse their symbolic analysis.
    """

    def __init__(self, g: Graph, fixed, candidate):
        self.n = g.n
        fixed = np.asarray(fixed, dtype=np.int64)
        candidate = np.asarray(candidate, dtype=np.int64)
        self.fixed = fixed
        self.candidate = candidate
        pattern = _laplacian_from_arrays(g.n, g.u, g.v, np.ones(g.m))
        if g.n:
            pattern = pattern + sp.identity(g.n, format="csr")  # keep diagonal even for isolated nodes
        pattern = sp.csr_matrix(pattern)
        pattern.sort_indices()
        self.indptr = pattern.indptr.copy()
        self.indices = pattern.indices.copy()
        nnz = self.indices.size

        def slot(r, c):
            start, stop = self.indptr[r], self.indptr[r + 1]
            return start + np.searchsorted(self.indices[start:stop], c)

        slots = np.empty((g.m, 4), dtype=np.int64)
        for k, (a, b, _) in enumerate(g.edges):
            slots[k] = (slot(a, a), slot(b, b), slot(a, b), slot(b, a))
        self._slots = slots
        self._signs = np.array([1.0, 1.0, -1.0, -1.0])
        wf = g.w[fixed]
        self._base = np.bincount(slots[fixed].ravel(),
                                 weights=(wf[:, None] * self._signs).ravel(),
                                 minlength=nnz)
        self._cand_slots = slots[candidate].ravel()
        self._cand_vals = (g.w[candidate][:, None] * self._signs)
        self.cand_u = g.u[candidate]
        self.cand_v = g.v[candidate]
        self.cand_w = g.w[candidate]
        self.fixed_u = g.u[fixed]
        self.fixed_v = g.v[fixed]

    @property
    def nnz(self):
        return self.indices.size

    def data(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        vals = (self._cand_vals * x[:, None]).ravel()
        return self._base + np.bincount(self._cand_slots, weights=vals, minlength=self.nnz)

    def matrix(self, x) -> sp.csr_matrix:
        return sp.csr_matrix((self.data(x), self.indices, self.indptr), shape=(self.n, self.n))

    def components(self, x, tol=0.0) -> tuple[int, np.ndarray]:
        """Components of the graph made of fixed edges and candidates with ``x_k > tol``."""
        x = np.asarray(x, dtype=float)
        on = x > tol
        u = np.concatenate([self.fixed_u, self.cand_u[on]])
        v = np.concatenate([self.fixed_v, self.cand_v[on]])
        return components_from_arrays(self.n, u, v)
