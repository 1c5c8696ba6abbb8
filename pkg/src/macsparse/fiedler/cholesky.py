"""Sparse Cholesky factorization with a reusable symbolic phase.

The symbolic analysis (permutation, elimination tree, row patterns of the
factor) depends only on the sparsity pattern, so a solver working on a
sequence of matrices with identical pattern pays for it once and then only
runs the numeric up-looking factorization.
"""

from __future__ import annotations

import numba
import numpy as np
import scipy.sparse as sp

from ..errors import NotPositiveDefinite


@numba.njit(cache=True)
def _etree(n, Cp, Ci):
    parent = np.full(n, -1, np.int64)
    ancestor = np.full(n, -1, np.int64)
    for k in range(n):
        for p in range(Cp[k], Cp[k + 1]):
            i = Ci[p]
            while i != -1 and i < k:
                inext = ancestor[i]
                ancestor[i] = k
                if inext == -1:
                    parent[i] = k
                i = inext
    return parent


@numba.njit(cache=True)
def _row_patterns(n, Cp, Ci, parent):
    """Row patterns of L (strictly lower part) in topological order, plus
    column counts (diagonal included)."""
    mark = np.full(n, -1, np.int64)
    stack = np.empty(n, np.int64)
    colcount = np.ones(n, np.int64)
    cap = max(Cp[n], n) * 2 + 16
    Rj = np.empty(cap, np.int64)
    Rp = np.zeros(n + 1, np.int64)
    nz = 0
    for k in range(n):
        mark[k] = k
        for p in range(Cp[k], Cp[k + 1]):
            i = Ci[p]
            if i > k:
                continue
            ln = 0
            while mark[i] != k:
                stack[ln] = i
                ln += 1
                mark[i] = k
                i = parent[i]
            if nz + ln > cap:
                cap = max(2 * cap, nz + ln + 16)
                tmp = np.empty(cap, np.int64)
                tmp[:nz] = Rj[:nz]
                Rj = tmp
            for t in range(ln):
                Rj[nz + t] = stack[t]
            nz += ln
        Rp[k + 1] = nz
        # ascending column order is a valid topological order for the
        # sparse triangular solve of row k
        seg = Rj[Rp[k]:nz]
        seg.sort()
        for t in range(Rp[k], nz):
            colcount[Rj[t]] += 1
    return Rp, Rj[:nz].copy(), colcount


@numba.njit(cache=True)
def _numeric(n, Cp, Ci, Cx, Rp, Rj, Lp, Li, Lx):
    x = np.zeros(n)
    c = Lp[:-1].copy()
    for k in range(n):
        for p in range(Cp[k], Cp[k + 1]):
            i = Ci[p]
            if i <= k:
                x[i] += Cx[p]
        d = x[k]
        x[k] = 0.0
        for t in range(Rp[k], Rp[k + 1]):
            i = Rj[t]
            lki = x[i] / Lx[Lp[i]]
            x[i] = 0.0
            for p in range(Lp[i] + 1, c[i]):
                x[Li[p]] -= Lx[p] * lki
            d -= lki * lki
            p = c[i]
            c[i] += 1
            Li[p] = k
            Lx[p] = lki
        if not d > 0.0:
            return k, d
        p = c[k]
        c[k] += 1
        Li[p] = k
        Lx[p] = np.sqrt(d)
    return -1, 0.0


@numba.njit(cache=True)
def _lsolve(n, Lp, Li, Lx, y):
    for j in range(n):
        y[j] /= Lx[Lp[j]]
        yj = y[j]
        for p in range(Lp[j] + 1, Lp[j + 1]):
            y[Li[p]] -= Lx[p] * yj


@numba.njit(cache=True)
def _ltsolve(n, Lp, Li, Lx, y):
    for j in range(n - 1, -1, -1):
        s = y[j]
        for p in range(Lp[j] + 1, Lp[j + 1]):
            s -= Lx[p] * y[Li[p]]
        y[j] = s / Lx[Lp[j]]


@numba.njit(cache=True)
def _solve(n, perm, Lp, Li, Lx, b):
    y = np.empty(n)
    for i in range(n):
        y[i] = b[perm[i]]
    _lsolve(n, Lp, Li, Lx, y)
    _ltsolve(n, Lp, Li, Lx, y)
    out = np.empty(n)
    for i in range(n):
        out[perm[i]] = y[i]
    return out


class SymbolicCholesky:
    """Symbolic analysis of ``A[perm][:, perm]`` for a fixed symmetric pattern.

    ``A`` may be CSR or CSC with sorted indices; values are taken later from
    ``data`` arrays laid out exactly like ``A.data``.
    """

    def __init__(self, A, perm=None):
        A = sp.csr_matrix(A)
        A.sort_indices()
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("matrix must be square")
        self.n = n
        self.indptr = A.indptr.copy()
        self.indices = A.indices.copy()
        perm = np.arange(n) if perm is None else np.asarray(perm, dtype=np.int64)
        if perm.size != n or np.any(np.sort(perm) != np.arange(n)):
            raise ValueError("perm is not a permutation")
        self.perm = perm
        pinv = np.empty(n, np.int64)
        pinv[perm] = np.arange(n)
        self.pinv = pinv

        rows = np.repeat(np.arange(n), np.diff(A.indptr))
        cols = A.indices.astype(np.int64)
        src = np.arange(A.nnz, dtype=np.int64)
        pr, pc = pinv[rows], pinv[cols]
        keep = pr <= pc
        pr, pc, src = pr[keep], pc[keep], src[keep]
        # structural diagonal is required by the factorization
        has_diag = np.zeros(n, bool)
        has_diag[pr[pr == pc]] = True
        missing = np.flatnonzero(~has_diag)
        pr = np.concatenate([pr, missing])
        pc = np.concatenate([pc, missing])
        src = np.concatenate([src, np.full(missing.size, -1, np.int64)])
        order = np.lexsort((pr, pc))
        self._Ci = pr[order]
        self._src = src[order]
        counts = np.bincount(pc, minlength=n)
        self._Cp = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._diag_pos = np.flatnonzero(self._Ci == np.repeat(np.arange(n), counts))
        self.parent = _etree(n, self._Cp, self._Ci)
        self._Rp, self._Rj, colcount = _row_patterns(n, self._Cp, self._Ci, self.parent)
        self.Lp = np.concatenate([[0], np.cumsum(colcount)]).astype(np.int64)

    @property
    def nnz_factor(self) -> int:
        return int(self.Lp[-1])

    def factorize(self, data, shift=0.0) -> "CholeskyFactor":
        """Numeric factorization of ``A - shift * I`` where ``A.data == data``."""
        data = np.asarray(data, dtype=np.float64)
        Cx = np.where(self._src >= 0, data[np.maximum(self._src, 0)], 0.0)
        if shift:
            Cx[self._diag_pos] -= shift
        Li = np.empty(self.nnz_factor, np.int64)
        Lx = np.empty(self.nnz_factor)
        col, piv = _numeric(self.n, self._Cp, self._Ci, Cx, self._Rp, self._Rj,
                            self.Lp, Li, Lx)
        if col >= 0:
            raise NotPositiveDefinite(int(self.perm[col]), float(piv))
        return CholeskyFactor(self, Li, Lx)


class CholeskyFactor:
    """Lower-triangular ``L`` with ``L L^T = A[perm][:, perm]``."""

    def __init__(self, symbolic: SymbolicCholesky, Li, Lx):
        self.symbolic = symbolic
        self.n = symbolic.n
        self.perm = symbolic.perm
        self.Lp = symbolic.Lp
        self.Li = Li
        self.Lx = Lx

    def solve(self, b) -> np.ndarray:
        b = np.ascontiguousarray(b, dtype=np.float64)
        return _solve(self.n, self.perm, self.Lp, self.Li, self.Lx, b)

    def solve_lower(self, b) -> np.ndarray:
        """``L^{-1} b[perm]`` (forward substitution only)."""
        y = np.ascontiguousarray(np.asarray(b, dtype=np.float64)[self.perm])
        _lsolve(self.n, self.Lp, self.Li, self.Lx, y)
        return y

    @property
    def L(self) -> sp.csc_matrix:
        return sp.csc_matrix((self.Lx, self.Li, self.Lp), shape=(self.n, self.n))

    @property
    def nnz(self) -> int:
        return int(self.Lp[-1])


def sparse_cholesky(A, perm=None) -> CholeskyFactor:
    """Factor a sparse symmetric positive definite matrix.

    Raises ``NotPositiveDefinite`` (naming the offending column of ``A``)
    when a pivot is not strictly positive.
    """
    A = sp.csr_matrix(A, dtype=np.float64)
    A.sort_indices()
    return SymbolicCholesky(A, perm).factorize(A.data)
