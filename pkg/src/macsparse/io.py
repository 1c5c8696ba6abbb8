"""Readers and writers for edge lists and the g2o pose-graph subset."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .graph import EdgePartition, Graph, WeightedEdge

log = logging.getLogger(__name__)

WEIGHT_RULES = ("trace", "min-eig-2x2-rot", "fixed:<value>")


def _dense_ids(raw_ids):
    """Map raw node tokens to 0..n-1.

    Integer ids are numbered in sorted order (so files already using
    0..n-1 keep their numbering); anything else by first appearance.
    """
    uniq = list(dict.fromkeys(raw_ids))
    try:
        keyed = sorted(uniq, key=int)
        labels = [int(t) for t in keyed]
    except ValueError:
        keyed = uniq
        labels = list(uniq)
    return {tok: i for i, tok in enumerate(keyed)}, labels


def _check_and_build(records, node_tokens):
    index, labels = _dense_ids(node_tokens)
    seen = {}
    edges, fixed = [], []
    for lineno, a, b, w, is_fixed in records:
        ia, ib = index[a], index[b]
        if ia == ib:
            raise ParseError(f"self-loop on node {a}", lineno)
        if not w > 0 or not np.isfinite(w):
            raise ParseError(f"weight must be positive, got {w}", lineno)
        key = (min(ia, ib), max(ia, ib))
        if key in seen:
            raise ParseError(f"duplicate edge {a} {b} (first seen on line {seen[key]})", lineno)
        seen[key] = lineno
        if is_fixed:
            fixed.append(len(edges))
        edges.append(WeightedEdge(ia, ib, w))
    g = Graph(len(labels), tuple(edges), tuple(labels))
    return g, EdgePartition.from_fixed(g, fixed)


def parse_edge_list(text: str) -> tuple[Graph, EdgePartition]:
    """Parse ``u v w [f|c]`` lines; ``#`` starts a comment.

    Edge indices follow file order.  Edges marked ``f`` go to the fixed
    set; the budget defaults to the full candidate count.
    """
    records, tokens = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise ParseError(f"expected 'u v w [f|c]', got {raw.strip()!r}", lineno)
        a, b = parts[0], parts[1]
        try:
            w = float(parts[2])
        except ValueError:
            raise ParseError(f"bad weight {parts[2]!r}", lineno) from None
        marker = parts[3] if len(parts) == 4 else "c"
        if marker not in ("f", "c"):
            raise ParseError(f"marker must be 'f' or 'c', got {marker!r}", lineno)
        records.append((lineno, a, b, w, marker == "f"))
        tokens.extend((a, b))
    return _check_and_build(records, tokens)


def format_edge_list(g: Graph, fixed=(), edges=None, header=None) -> str:
    """Edge-list text using the graph's original node labels.

    ``edges`` restricts output to those indices (in the given order);
    indices in ``fixed`` get the ``f`` marker.
    """
    fixed = set(int(k) for k in fixed)
    idx = range(g.m) if edges is None else [int(k) for k in edges]
    out = []
    if header:
        out.extend(f"# {h}" for h in header.splitlines())
    for k in idx:
        a, b, w = g.edges[k]
        out.append(f"{g.labels[a]} {g.labels[b]} {w!r} {'f' if k in fixed else 'c'}")
    return "\n".join(out) + "\n"


def _upper_to_matrix(vals, dim):
    M = np.zeros((dim, dim))
    iu = np.triu_indices(dim)
    M[iu] = vals
    return M + np.triu(M, 1).T


def _information_weight(info, rule, kind):
    if rule == "trace":
        return float(np.trace(info))
    if rule in ("min-eig-2x2-rot", "min-eig-rot"):
        if kind == "se2":
            return float(info[2, 2])
        return float(np.linalg.eigvalsh(info[3:, 3:])[0])
    if rule.startswith("fixed:"):
        try:
            return float(rule.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad fixed weight rule {rule!r}") from None
    raise InputError(f"unknown weight rule {rule!r}; expected one of {WEIGHT_RULES}")


def parse_g2o(text: str, weight_rule: str = "trace", odom_backbone: bool = False):
    """Parse the SE(2)/SE(3) subset of g2o into a weighted graph.

    Each information matrix is reduced to a scalar weight by
    ``weight_rule``: ``trace``, ``min-eig-2x2-rot`` (precision of the
    rotational block: the angle entry for SE(2), the smallest eigenvalue
    of the 3x3 rotation block for SE(3)) or ``fixed:<value>``.  With
    ``odom_backbone`` the edges between consecutive vertex ids are fixed.
    """
    records, tokens = [], []
    skipped = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        try:
            if tag in ("VERTEX_SE2", "VERTEX_SE3:QUAT"):
                tokens.append(parts[1])
                continue
            if tag == "EDGE_SE2":
                kind, dim, npose = "se2", 3, 3
            elif tag == "EDGE_SE3:QUAT":
                kind, dim, npose = "se3", 6, 7
            else:
                skipped[tag] = skipped.get(tag, 0) + 1
                continue
            a, b = parts[1], parts[2]
            ninfo = dim * (dim + 1) // 2
            vals = [float(t) for t in parts[3 + npose:3 + npose + ninfo]]
            if len(vals) != ninfo:
                raise ParseError(f"{tag} needs {ninfo} information entries, got {len(vals)}", lineno)
        except (IndexError, ValueError):
            raise ParseError(f"malformed {tag} line", lineno) from None
        info = _upper_to_matrix(vals, dim)
        eig = np.linalg.eigvalsh(info)
        if eig[0] < -1e-9 * max(1.0, abs(eig[-1])):
            raise ParseError("information matrix is not positive semidefinite", lineno)
        w = _information_weight(info, weight_rule, kind)
        is_odom = False
        if odom_backbone:
            try:
                is_odom = abs(int(a) - int(b)) == 1
            except ValueError:
                is_odom = False
        records.append((lineno, a, b, w, is_odom))
        tokens.extend((a, b))
    if skipped:
        log.warning("skipped unknown g2o tags: %s",
                    ", ".join(f"{t} x{c}" for t, c in sorted(skipped.items())))
    return _check_and_build(records, tokens)


def read_graph(path, fmt: str = "auto", weight_rule: str = "trace", odom_backbone: bool = False):
    path = Path(path)
    text = path.read_text()
    if fmt == "auto":
        fmt = "g2o" if path.suffix.lower() == ".g2o" else "edges"
    if fmt == "g2o":
        return parse_g2o(text, weight_rule=weight_rule, odom_backbone=odom_backbone)
    if fmt == "edges":
        return parse_edge_list(text)
    raise InputError(f"unknown input format {fmt!r}")
