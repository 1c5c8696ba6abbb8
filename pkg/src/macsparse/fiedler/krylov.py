"""Krylov-Schur eigensolver for symmetric operators.

For a symmetric operator the Krylov-Schur decomposition
``T V_m = V_m H_m + beta v_{m+1} e_m^T`` has a symmetric projected matrix,
so the Schur form is an eigendecomposition and restarting amounts to a
thick restart: keep the best Ritz vectors, carry the residual direction,
and expand again with full reorthogonalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NoConvergence


@dataclass
class KrylovResult:
    ritz_values: np.ndarray
    ritz_vectors: np.ndarray  # columns, unit norm
    residuals: np.ndarray
    restarts: int = 0
    matvecs: int = 0
    breakdowns: int = 0
    converged: np.ndarray = field(default=None)


def _orthonormalize(w, V, j):
    """Two passes of classical Gram-Schmidt against ``V[:, :j]``."""
    if j == 0:
        return w, np.zeros(0)
    Vj = V[:, :j]
    h = Vj.T @ w
    w = w - Vj @ h
    h2 = Vj.T @ w
    w = w - Vj @ h2
    return w, h + h2


def _fresh_direction(V, j, rng, project):
    n = V.shape[0]
    for _ in range(3):
        r = rng.standard_normal(n)
        if project is not None:
            r = project(r)
        r, _ = _orthonormalize(r, V, j)
        nr = np.linalg.norm(r)
        if nr > 1e-8:
            return r / nr
    return None


def krylov_schur(op, v0, m, k=1, tol=1e-10, max_restarts=200, *, rng=None,
                 project=None, verify=False, keep=None) -> KrylovResult:
    """Largest-magnitude eigenpairs of a symmetric linear operator.

    Parameters
    ----------
    op : callable
        ``op(v) -> T v`` for a symmetric ``T``.
    v0 : ndarray
        Nonzero start vector.
    m : int
        Subspace dimension (``k < m <= n``).
    k : int
        Number of wanted eigenpairs.
    tol : float
        A Ritz pair ``(theta, y)`` is converged when
        ``||T y - theta y|| <= tol * |theta|``.
    max_restarts : int
        Raise ``NoConvergence`` after this many restarts.
    rng : numpy Generator, optional
        Source for replacement directions after breakdown and for the
        verification pass.
    project : callable, optional
        Applied to random directions so they stay in the operator's
        invariant subspace of interest (e.g. deflation of a known vector).
    verify : bool
        After convergence, restart once with the locked Ritz vectors plus
        a fresh random direction and accept only if no larger Ritz value
        appears.  Guards against start vectors that are (numerically)
        orthogonal to the dominant eigenvector.
    keep : int, optional
        Ritz vectors kept at each restart (default ``(m + k) // 2``).

    Returns
    -------
    KrylovResult
        Wanted pairs ordered by decreasing magnitude.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    v0 = np.asarray(v0, dtype=float)
    n = v0.size
    nv0 = np.linalg.norm(v0)
    if not nv0 > 0:
        raise ValueError("start vector must be nonzero")
    m = int(min(m, n))
    k = int(min(k, m))
    p_keep = max(k, (m + k) // 2) if keep is None else int(keep)
    p_keep = min(max(p_keep, k), m - 1) if m > 1 else 0

    V = np.zeros((n, m + 1))
    H = np.zeros((m, m))
    V[:, 0] = v0 / nv0
    start = 0
    restarts = matvecs = breakdowns = 0
    verified = not verify
    verifying = False
    pending_theta = None
    best_res = np.inf

    while True:
        m_eff = m
        beta = 0.0
        for j in range(start, m):
            w = op(V[:, j])
            matvecs += 1
            w, h = _orthonormalize(w, V, j + 1)
            H[: j + 1, j] = h
            H[j, : j + 1] = h
            beta = np.linalg.norm(w)
            scale = max(np.abs(h).max(initial=0.0), 1e-300)
            if beta <= 1e-12 * scale:
                # invariant subspace: continue with a fresh orthogonal direction
                breakdowns += 1
                beta = 0.0
                nxt = _fresh_direction(V, j + 1, rng, project)
                if nxt is None:
                    m_eff = j + 1
                    break
                V[:, j + 1] = nxt
            else:
                V[:, j + 1] = w / beta
            if j + 1 < m:
                H[j + 1, j] = H[j, j + 1] = beta

        Hm = H[:m_eff, :m_eff]
        theta, Y = np.linalg.eigh(0.5 * (Hm + Hm.T))
        order = np.argsort(-np.abs(theta), kind="stable")
        theta, Y = theta[order], Y[:, order]
        res = np.abs(beta * Y[m_eff - 1, :])
        thr = tol * np.maximum(np.abs(theta), np.finfo(float).tiny)
        conv = res <= thr
        best_res = min(best_res, float(np.max(res[:k] / np.maximum(np.abs(theta[:k]), 1e-300))))

        if verifying:
            verifying = False
            verified = not np.any(np.abs(theta[:k]) > pending_theta * (1 + 1e-8))
        done = m_eff < m or bool(np.all(conv[:k]))
        if done and (verified or m_eff < m):
            X = V[:, :m_eff] @ Y[:, :k]
            X /= np.linalg.norm(X, axis=0)
            return KrylovResult(theta[:k].copy(), X, res[:k].copy(), restarts,
                                matvecs, breakdowns, conv[:k].copy())
        if done:
            # verification pass: locked Ritz vectors plus a random direction
            V[:, :k] = V[:, :m_eff] @ Y[:, :k]
            nxt_dir = _fresh_direction(V, k, rng, project)
            if nxt_dir is None:
                X = V[:, :k] / np.linalg.norm(V[:, :k], axis=0)
                return KrylovResult(theta[:k].copy(), X, res[:k].copy(), restarts,
                                    matvecs, breakdowns, conv[:k].copy())
            pending_theta = np.abs(theta[:k]).copy()
            H[:] = 0.0
            H[np.arange(k), np.arange(k)] = theta[:k]
            V[:, k] = nxt_dir
            start = k
            verifying = True
            restarts += 1
            continue

        if restarts >= max_restarts:
            raise NoConvergence(restarts, best_res)

        # thick restart keeping the leading p_keep Ritz vectors
        p = p_keep
        b = beta * Y[m_eff - 1, :p]
        V[:, :p] = V[:, :m_eff] @ Y[:, :p]
        V[:, p] = V[:, m_eff]
        H[:] = 0.0
        H[np.arange(p), np.arange(p)] = theta[:p]
        H[:p, p] = b
        H[p, :p] = b
        start = p
        restarts += 1
