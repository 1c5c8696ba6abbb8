"""Deterministic synthetic graphs for tests and benchmarks.

Each generator returns ``(graph, fixed)`` where ``fixed`` lists the edge
indices that should carry the ``f`` marker when written out.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .graph import Graph, components_from_arrays

KINDS = ("grid2d", "grid3d", "geometric", "chain-closures")


def _lattice(shape) -> Graph:
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    us, vs = [], []
    for ax in range(len(shape)):
        lo = [slice(None)] * len(shape)
        hi = [slice(None)] * len(shape)
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        us.append(idx[tuple(lo)].ravel())
        vs.append(idx[tuple(hi)].ravel())
    u, v = np.concatenate(us), np.concatenate(vs)
    return Graph.from_arrays(idx.size, u, v, np.ones(u.size))


def grid2d(rows: int, cols: int) -> tuple[Graph, np.ndarray]:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise InputError("grid2d needs at least two nodes")
    return _lattice((rows, cols)), np.empty(0, np.int64)


def grid3d(nx: int, ny: int, nz: int) -> tuple[Graph, np.ndarray]:
    if min(nx, ny, nz) < 1 or nx * ny * nz < 2:
        raise InputError("grid3d needs at least two nodes")
    return _lattice((nx, ny, nz)), np.empty(0, np.int64)


def geometric(n: int, radius: float, seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Points uniform on the unit sphere joined when closer than ``radius``.

    Edge weight is ``1 / max(d, 1e-3)`` for chord length ``d``.  Raises
    ``InputError`` if the result is disconnected.
    """
    if n < 2 or not radius > 0:
        raise InputError("geometric needs n >= 2 and radius > 0")
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    u, v = np.nonzero(np.triu(d < radius, 1))
    count, _ = components_from_arrays(n, u, v)
    if count > 1:
        raise InputError(f"geometric graph with radius {radius} has {count} components; "
                         "increase the radius")
    w = 1.0 / np.maximum(d[u, v], 1e-3)
    return Graph.from_arrays(n, u, v, w), np.empty(0, np.int64)


def chain_closures(n: int, p: float, seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Odometry-like chain ``0-1-...-(n-1)`` plus random loop closures.

    Every non-adjacent pair becomes a closure with probability ``p`` and
    weight uniform on ``[0.1, 1)``; chain edges have weight one and are
    returned as the fixed set.
    """
    if n < 2 or not 0 <= p <= 1:
        raise InputError("chain-closures needs n >= 2 and p in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 2)
    keep = rng.random(iu.size) < p
    cu, cv = iu[keep], ju[keep]
    cw = rng.uniform(0.1, 1.0, cu.size)
    chain = np.arange(n - 1)
    u = np.concatenate([chain, cu])
    v = np.concatenate([chain + 1, cv])
    w = np.concatenate([np.ones(n - 1), cw])
    return Graph.from_arrays(n, u, v, w), np.arange(n - 1)


def generate(kind: str, params: dict, seed: int = 0) -> tuple[Graph, np.ndarray]:
    """Dispatch on ``kind`` with parameters taken from ``params``."""
    try:
        if kind == "grid2d":
            return grid2d(int(params.get("rows", 5)), int(params.get("cols", params.get("rows", 5))))
        if kind == "grid3d":
            nx = int(params.get("nx", 20))
            return grid3d(nx, int(params.get("ny", nx)), int(params.get("nz", nx)))
        if kind == "geometric":
            return geometric(int(params.get("n", 200)), float(params.get("radius", 0.3)), seed)
        if kind == "chain-closures":
            return chain_closures(int(params.get("n", 100)), float(params.get("p", 0.05)), seed)
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad parameters for {kind}: {exc}") from None
    raise InputError(f"unknown generator {kind!r}; choose from {KINDS}")
