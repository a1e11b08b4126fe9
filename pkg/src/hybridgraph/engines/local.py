"""Single-machine, database-style engine.

Queries run against the graph's resident adjacency index on one thread, and
results come back through a record cursor: one Python row per output record.
That makes small answers (a count, a handful of bindings) very cheap and
large answers proportionally expensive, which is the cost profile of a graph
database serving results to a client.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from ..errors import ValidationError
from ..graph import PropertyGraph, VertexRef
from . import _kernels
from .results import ComponentLabeling, MotifBinding

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 100


def _union_find(graph: PropertyGraph):
    return _kernels.union_find(graph.vertex_count, graph.src_idx, graph.dst_idx)


def _component_rows(vertices, parent: np.ndarray) -> Iterator[tuple[VertexRef, VertexRef]]:
    # vertices arrive in ascending order, so the first one seen per root is the minimum
    parent = parent.tolist()
    rep_of_root: dict[int, int] = {}
    for i, v in enumerate(vertices):
        r = i
        while parent[r] != r:
            r = parent[r]
        parent[i] = r
        yield v, vertices[rep_of_root.setdefault(r, i)]


def connected_components_local(graph: PropertyGraph) -> ComponentLabeling:
    parent, count = _union_find(graph)
    assignment = {}
    for v, rep in _component_rows(graph.vertices, parent):
        assignment[v] = rep
    return ComponentLabeling(assignment, int(count))


def count_components_local(graph: PropertyGraph) -> int:
    """Component count from the live union-find counter; no per-vertex rows."""
    return int(_union_find(graph)[1])


def two_hop_match_local(graph: PropertyGraph, endpoint_type: str, via_types: Iterable[str]) -> list[MotifBinding]:
    """All ``(a) -> (via) <- (b)`` bindings with a < b, sorted by (a, b, via)."""
    via_types = set(via_types)
    vertices, edges = graph.vertices, graph.edges
    indptr, ids = graph.in_csr
    found = []
    for i, via in enumerate(vertices):
        if via.vtype not in via_types or indptr[i + 1] - indptr[i] < 2:
            continue
        users = sorted({edges[k].src for k in ids[indptr[i]:indptr[i + 1]] if edges[k].src.vtype == endpoint_type})
        for x in range(len(users)):
            for y in range(x + 1, len(users)):
                found.append(MotifBinding(users[x], via, users[y]))
    found.sort(key=lambda m: (m.a, m.b, m.via))
    return found


def check_pagerank_args(damping, max_iters, tol) -> None:
    if not 0 < damping < 1:
        raise ValidationError(f"damping must lie strictly between 0 and 1, got {damping!r}")
    if int(max_iters) != max_iters or max_iters < 1:
        raise ValidationError(f"max_iters must be a positive integer, got {max_iters!r}")
    if not tol >= 0:
        raise ValidationError(f"tol must be non-negative, got {tol!r}")


def pagerank_local(
    graph: PropertyGraph,
    damping: float = DEFAULT_DAMPING,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    history: list | None = None,
) -> dict[VertexRef, float]:
    """Power iteration; dangling mass is spread uniformly over all vertices.

    If ``history`` is given, the score total after each iteration is appended.
    """
    check_pagerank_args(damping, max_iters, tol)
    n = graph.vertex_count
    if n == 0:
        return {}
    src, dst = graph.link_pairs
    outdeg = np.bincount(src, minlength=n).astype(np.float64)
    dangling = outdeg == 0
    inv = np.divide(1.0, outdeg, out=np.zeros(n), where=~dangling)
    rank = np.full(n, 1.0 / n)
    for _ in range(int(max_iters)):
        spread = np.bincount(dst, weights=(rank * inv)[src], minlength=n)
        new = (1.0 - damping) / n + damping * (spread + rank[dangling].sum() / n)
        delta = np.abs(new - rank).sum()
        rank = new
        if history is not None:
            history.append(float(rank.sum()))
        if delta < tol:
            break
    return dict(zip(graph.vertices, rank.tolist()))
