"""Fixed-edge backbones: effective-resistance spanning trees and odometry chains."""

from __future__ import annotations

import numba
import numpy as np
import scipy.sparse as sp

from .errors import DisconnectedGraph, NotSpanning
from .fiedler.cholesky import SymbolicCholesky
from .fiedler.ordering import amd_ordering
from .graph import Graph, build_laplacian, components_from_arrays, connected_components
from .rounding import maximum_spanning_tree

TIE_DECIMALS = 10


@numba.njit(cache=True)
def _resistances(parent, Lp, Li, Lx, a_pos, b_pos):
    """``||R^{-1} (e_a - e_b)||^2`` per pair, skipping the grounded side (-1).

    The nonzeros of ``R^{-1} e_a`` lie on the elimination-tree path from
    ``a`` to its root, so each solve only visits the union of two paths.
    """
    n = parent.size
    y = np.zeros(n)
    mark = np.full(n, -1, np.int64)
    path = np.empty(n, np.int64)
    out = np.empty(a_pos.size)
    for e in range(a_pos.size):
        ln = 0
        for start in (a_pos[e], b_pos[e]):
            i = start
            while i != -1 and mark[i] != e:
                mark[i] = e
                path[ln] = i
                ln += 1
                i = parent[i]
        cols = np.sort(path[:ln])
        if a_pos[e] >= 0:
            y[a_pos[e]] += 1.0
        if b_pos[e] >= 0:
            y[b_pos[e]] -= 1.0
        total = 0.0
        for t in range(ln):
            j = cols[t]
            yj = y[j] / Lx[Lp[j]]
            y[j] = 0.0
            total += yj * yj
            for p in range(Lp[j] + 1, Lp[j + 1]):
                y[Li[p]] -= Lx[p] * yj
        out[e] = total
    return out


def effective_resistance(L, edges, ground: int = 0) -> np.ndarray:
    """Effective resistance ``(e_i - e_j)^T L^+ (e_i - e_j)`` for each ``(i, j)``.

    Node ``ground`` is removed to make the reduced Laplacian positive
    definite; it is factored once and each pair costs one sparse forward
    solve.  Raises ``DisconnectedGraph`` when the graph of ``L`` is not
    connected.
    """
    L = sp.csr_matrix(L, dtype=float)
    n = L.shape[0]
    pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if n < 2:
        if pairs.size:
            raise DisconnectedGraph("graph needs at least two nodes")
        return np.zeros(0)
    coo = L.tocoo()
    off = (coo.row < coo.col) & (coo.data != 0)
    count, labels = components_from_arrays(n, coo.row[off], coo.col[off])
    if count > 1:
        raise DisconnectedGraph(f"graph has {count} connected components", components=labels)
    keep = np.delete(np.arange(n), ground)
    Lr = L[keep][:, keep].tocsr()
    Lr.sort_indices()
    perm = amd_ordering(Lr)
    sym = SymbolicCholesky(Lr, perm)
    fac = sym.factorize(Lr.data)
    # original node -> permuted position in the reduced system (-1 for ground)
    pos = np.full(n, -1, np.int64)
    pos[keep] = sym.pinv
    return _resistances(sym.parent, fac.Lp, fac.Li, fac.Lx, pos[pairs[:, 0]], pos[pairs[:, 1]])


def edge_resistances(g: Graph, ground: int = 0) -> np.ndarray:
    """Effective resistance of every edge of ``g``, in edge order."""
    return effective_resistance(build_laplacian(g), np.column_stack([g.u, g.v]), ground)


def spectral_backbone(g: Graph) -> np.ndarray:
    """Maximum spanning tree under ``r_k w_k`` (sorted edge indices).

    Products are rounded to ten decimals so that analytically equal
    values tie and fall to the lower edge index.
    """
    r = edge_resistances(g)
    score = np.round(r * g.w, TIE_DECIMALS)
    return np.sort(maximum_spanning_tree(g, score))


def odometry_backbone(g: Graph, marked=None) -> np.ndarray:
    """Explicitly marked edges, or else the consecutive-id chain.

    Consecutive means ``|u - v| == 1`` on the original node labels when
    they are integers, else on the dense ids.  Raises ``NotSpanning``
    unless the result connects every node.
    """
    if marked is not None and len(marked):
        chosen = np.sort(np.asarray(marked, dtype=np.int64))
    else:
        try:
            ids = np.array([int(lbl) for lbl in g.labels], dtype=np.int64)
        except (TypeError, ValueError):
            ids = np.arange(g.n)
        chosen = np.flatnonzero(np.abs(ids[g.u] - ids[g.v]) == 1)
    count, _ = connected_components(g, chosen)
    if count != 1:
        raise NotSpanning(f"backbone of {chosen.size} edges leaves {count} components")
    return chosen
