"""Fiedler pair of a graph Laplacian by deflated shift-invert Krylov-Schur.

Pipeline per solve:

1. factor ``A = L - sigma I`` (``sigma < 0`` keeps it positive definite)
   under an AMD ordering;
2. wrap the solve as ``T(v) = P(A^{-1} P(v))`` where ``P`` removes the
   component along the all-ones vector;
3. find the dominant Ritz pair of ``T`` with Krylov-Schur;
4. map back with ``lambda = sigma + 1/theta``.

:class:`FiedlerSolver` keeps the ordering and symbolic factorization for a
fixed sparsity pattern so repeated solves only refactor numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ..errors import DisconnectedGraph, TooLarge
from .cholesky import SymbolicCholesky
from .krylov import krylov_schur
from .ordering import amd_ordering

DEFAULT_SHIFT_FACTOR = 1e-3
KRYLOV_TOL = 1e-10
DENSE_LIMIT = 2000


@dataclass
class FiedlerPair:
    lambda2: float
    q2: np.ndarray
    residual: float = 0.0  # ||L q2 - lambda2 q2||
    restarts: int = 0
    matvecs: int = 0


def deflate(v) -> np.ndarray:
    """Project ``v`` onto the orthogonal complement of the all-ones vector."""
    v = np.asarray(v, dtype=float)
    return v - v.mean()


def default_shift(L) -> float:
    """``-1e-3`` times the mean diagonal of ``L``."""
    d = np.asarray(L.diagonal(), dtype=float)
    mean = d.mean() if d.size else 0.0
    return -DEFAULT_SHIFT_FACTOR * (mean if mean > 0 else 1.0)


def _laplacian_components(L) -> tuple[int, np.ndarray]:
    coo = sp.coo_matrix(L)
    off = (coo.row != coo.col) & (coo.data != 0)
    A = sp.coo_matrix((np.ones(off.sum()), (coo.row[off], coo.col[off])), shape=L.shape)
    return csgraph.connected_components(A.tocsr(), directed=False)


def _residual(L, q, lam) -> float:
    return float(np.linalg.norm(L @ q - lam * q))


class FiedlerSolver:
    """Reusable shift-invert Fiedler solver for Laplacians sharing one pattern.

    Parameters
    ----------
    pattern : sparse matrix
        Any matrix with the sparsity pattern of the Laplacians to be
        solved (values are ignored).  Later calls to :meth:`solve` must
        pass matrices whose CSR ``indptr``/``indices`` match, or raw
        ``data`` arrays in that layout.
    k : int
        Ritz pairs requested from Krylov-Schur (the subspace dimension is
        ``min(2k + 10, n)``).
    tol : float
        Relative Ritz residual tolerance on the shift-inverted operator.
    check_connected : bool
        Run a component count before each solve and raise
        ``DisconnectedGraph`` when it exceeds one.
    """

    def __init__(self, pattern, *, k=1, tol=KRYLOV_TOL, max_restarts=300,
                 seed=0, check_connected=True, verify=False, warm_mix=1e-2):
        P = sp.csr_matrix(pattern)
        P.sort_indices()
        self.n = P.shape[0]
        self.indptr = P.indptr
        self.indices = P.indices
        self.perm = amd_ordering(P)
        self.symbolic = SymbolicCholesky(P, self.perm)
        self.k = k
        self.tol = tol
        self.max_restarts = max_restarts
        self.seed = seed
        self.check_connected = check_connected
        self.verify = verify
        self.warm_mix = warm_mix
        self.last = None

    def _as_matrix(self, L):
        if sp.issparse(L):
            L = sp.csr_matrix(L)
            L.sort_indices()
            if (L.indptr.shape != self.indptr.shape or L.indices.shape != self.indices.shape
                    or np.any(L.indptr != self.indptr) or np.any(L.indices != self.indices)):
                raise ValueError("matrix pattern differs from the solver's pattern")
            return L
        data = np.asarray(L, dtype=float)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def _start_vector(self, x0, rng):
        r = deflate(rng.standard_normal(self.n))
        r /= np.linalg.norm(r)
        if x0 is None:
            return r
        v = deflate(x0)
        nv = np.linalg.norm(v)
        if not nv > 0:
            return r
        # a small random admixture keeps every eigendirection represented
        return v / nv + self.warm_mix * r

    def solve(self, L, x0=None, sigma=None) -> FiedlerPair:
        L = self._as_matrix(L)
        n = self.n
        if n < 2:
            raise DisconnectedGraph("graph needs at least two nodes", components=n)
        if self.check_connected:
            count, labels = _laplacian_components(L)
            if count > 1:
                raise DisconnectedGraph(f"graph has {count} connected components",
                                        components=labels)
        sigma = default_shift(L) if sigma is None else float(sigma)
        factor = self.symbolic.factorize(L.data, shift=sigma)

        def op(v):
            return deflate(factor.solve(deflate(v)))

        rng = np.random.default_rng(self.seed)
        v0 = self._start_vector(x0, rng)
        m = min(2 * self.k + 10, n)
        res = krylov_schur(op, v0, m, k=self.k, tol=self.tol,
                           max_restarts=self.max_restarts, rng=rng,
                           project=deflate, verify=self.verify)
        lam = sigma + 1.0 / res.ritz_values
        # ascending eigenvalues; ties resolved by Ritz residual
        order = np.lexsort((res.residuals, lam))
        i = order[0]
        if not res.ritz_values[i] > 0:
            raise DisconnectedGraph("shift-inverted spectrum has no positive Ritz value")
        q = deflate(res.ritz_vectors[:, i])
        q /= np.linalg.norm(q)
        lam2 = float(lam[i])
        pair = FiedlerPair(lam2, q, _residual(L, q, lam2), res.restarts, res.matvecs)
        self.last = pair
        return pair


def fiedler_shift_invert(L, sigma=None, x0=None, **kwargs) -> FiedlerPair:
    """One-shot Fiedler pair of a connected graph Laplacian.

    ``sigma`` defaults to ``-1e-3 * mean(diag(L))``; ``x0`` is an optional
    warm-start vector.  Raises ``DisconnectedGraph`` when the graph has
    more than one component and ``NotPositiveDefinite`` if ``L - sigma I``
    cannot be factored (``sigma`` too large).
    """
    L = sp.csr_matrix(L, dtype=float)
    L.sort_indices()
    return FiedlerSolver(L, **kwargs).solve(L, x0=x0, sigma=sigma)


def fiedler_dense_oracle(L, limit=DENSE_LIMIT) -> FiedlerPair:
    """Reference Fiedler pair from a full symmetric eigendecomposition."""
    n = L.shape[0]
    if n > limit:
        raise TooLarge(f"dense oracle limited to n <= {limit}, got {n}")
    A = L.toarray() if sp.issparse(L) else np.asarray(L, dtype=float)
    evals, evecs = np.linalg.eigh(A)
    q = deflate(evecs[:, 1])
    nq = np.linalg.norm(q)
    if nq < 1e-8:
        # degenerate zero eigenspace: any deflated vector in it will do
        q = deflate(evecs[:, 0])
        nq = np.linalg.norm(q)
    q /= nq
    lam = float(evals[1])
    return FiedlerPair(lam, q, _residual(sp.csr_matrix(A), q, lam))
