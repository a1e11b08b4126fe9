"""In-memory property graph: typed vertices, labelled edges, adjacency, degree cap.

Vertices are ``(vtype, vid)`` pairs. The graph keeps its vertex table sorted in
``(vtype, vid)`` order, so a vertex's integer index orders the same way as the
vertex itself. The engines rely on that: the minimum index of a component is
its canonical representative.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import NotFoundError, ValidationError

DEFAULT_EDGE_LABEL = "links_to"
MAX_VID = 2**64 - 1


class VertexRef(NamedTuple):
    vtype: str
    vid: int

    def __str__(self) -> str:
        return f"{self.vtype}:{self.vid}"

    @classmethod
    def parse(cls, text: str) -> "VertexRef":
        """Parse ``vtype:vid`` text into a validated vertex."""
        parts = text.split(":")
        if len(parts) != 2:
            raise ValidationError(f"expected 'vtype:vid', got {text!r}")
        vtype, raw = parts
        if not raw.isdigit():
            raise ValidationError(f"vertex id is not an unsigned integer in {text!r}")
        return check_vertex(cls(vtype, int(raw)))


class Edge(NamedTuple):
    src: VertexRef
    dst: VertexRef
    elabel: str = DEFAULT_EDGE_LABEL
    # sorted (key, value) pairs so edges stay hashable and orderable
    props: tuple[tuple[str, str], ...] = ()

    @classmethod
    def make(cls, src, dst, elabel=DEFAULT_EDGE_LABEL, props: Mapping[str, str] | None = None) -> "Edge":
        return cls(src, dst, elabel, tuple(sorted((props or {}).items())))


def check_vertex(v) -> VertexRef:
    if not isinstance(v, tuple) or len(v) != 2:
        raise ValidationError(f"malformed vertex record {v!r}")
    vtype, vid = v
    if not isinstance(vtype, str) or not vtype:
        raise ValidationError(f"vertex {v!r}: vtype must be a non-empty string")
    if ":" in vtype or any(ch.isspace() for ch in vtype):
        raise ValidationError(f"vertex {v!r}: vtype may not contain ':' or whitespace")
    if isinstance(vid, bool) or not isinstance(vid, (int, np.integer)) or not 0 <= vid <= MAX_VID:
        raise ValidationError(f"vertex {v!r}: vid must be an unsigned 64-bit integer")
    return v if type(v) is VertexRef else VertexRef(vtype, int(vid))


def _check_edge(e) -> Edge:
    if not isinstance(e, tuple) or len(e) not in (2, 3, 4):
        raise ValidationError(f"malformed edge record {e!r}")
    src, dst = check_vertex(e[0]), check_vertex(e[1])
    elabel = e[2] if len(e) > 2 else DEFAULT_EDGE_LABEL
    if not isinstance(elabel, str) or not elabel:
        raise ValidationError(f"edge {e!r}: elabel must be a non-empty string")
    props = e[3] if len(e) > 3 else ()
    if isinstance(props, Mapping):
        props = tuple(sorted(props.items()))
    if type(e) is Edge and src is e.src and dst is e.dst and props is e.props:
        return e
    return Edge(src, dst, elabel, tuple(props))


class PropertyGraph:
    """Immutable typed multi-relational graph.

    Build instances with :func:`build_graph`; the constructor trusts its
    inputs (sorted, deduplicated, closed under edge endpoints).
    """

    def __init__(
        self,
        vertices: tuple[VertexRef, ...],
        edges: tuple[Edge, ...],
        directed: bool = True,
        vertex_props: Mapping[VertexRef, Mapping[str, str]] | None = None,
        sources: tuple[tuple[str, int], ...] = (),
        index: dict[VertexRef, int] | None = None,
    ):
        self.vertices = vertices
        self.edges = edges
        self.directed = directed
        self.vertex_props = dict(vertex_props or {})
        self.sources = sources
        self.index = index if index is not None else {v: i for i, v in enumerate(vertices)}
        idx = self.index
        self.src_idx = np.fromiter((idx[e.src] for e in edges), dtype=np.int64, count=len(edges))
        self.dst_idx = np.fromiter((idx[e.dst] for e in edges), dtype=np.int64, count=len(edges))
        self.src_idx.flags.writeable = False
        self.dst_idx.flags.writeable = False

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __contains__(self, v) -> bool:
        return v in self.index

    def __eq__(self, other) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return (
            self.directed == other.directed
            and self.vertices == other.vertices
            and self.edges == other.edges
            and self.vertex_props == other.vertex_props
        )

    __hash__ = None

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"PropertyGraph(|V|={self.vertex_count}, |E|={self.edge_count}, {kind})"

    def vertex_index(self, v) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise NotFoundError(f"vertex {v!r} is not in the graph") from None

    # columnar views used by the engines

    @cached_property
    def vtypes(self) -> tuple[str, ...]:
        return tuple(sorted({v.vtype for v in self.vertices}))

    @cached_property
    def type_codes(self) -> np.ndarray:
        """Per-vertex index into :attr:`vtypes`."""
        code = {t: i for i, t in enumerate(self.vtypes)}
        arr = np.fromiter((code[v.vtype] for v in self.vertices), dtype=np.int64, count=self.vertex_count)
        arr.flags.writeable = False
        return arr

    @cached_property
    def vids(self) -> np.ndarray:
        arr = np.fromiter((v.vid for v in self.vertices), dtype=np.uint64, count=self.vertex_count)
        arr.flags.writeable = False
        return arr

    def type_mask(self, types: Iterable[str]) -> np.ndarray:
        wanted = [i for i, t in enumerate(self.vtypes) if t in set(types)]
        return np.isin(self.type_codes, wanted)

    @cached_property
    def out_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, edge_ids)``; edges are already grouped by source."""
        counts = np.bincount(self.src_idx, minlength=self.vertex_count)
        indptr = np.zeros(self.vertex_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, np.arange(self.edge_count, dtype=np.int64)

    @cached_property
    def in_csr(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.lexsort((self.src_idx, self.dst_idx))
        counts = np.bincount(self.dst_idx, minlength=self.vertex_count)
        indptr = np.zeros(self.vertex_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, order.astype(np.int64)

    @cached_property
    def link_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct directed (src, dst) index pairs, labels collapsed.

        For an undirected graph every edge contributes both directions.
        """
        src, dst = self.src_idx, self.dst_idx
        if not self.directed:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        n = max(self.vertex_count, 1)
        codes = np.unique(src.astype(np.int64) * n + dst)
        return codes // n, codes % n


def _sort_key_edges(edges: Iterable[Edge]) -> tuple[Edge, ...]:
    return tuple(sorted(dict.fromkeys(edges)))


def build_graph(
    vertices: Iterable = (),
    edges: Iterable = (),
    directed: bool = True,
    vertex_props: Mapping | None = None,
    sources: tuple[tuple[str, int], ...] = (),
) -> PropertyGraph:
    """Assemble a validated :class:`PropertyGraph`.

    Duplicate vertices and identical edges collapse; endpoints missing from
    ``vertices`` are added.
    """
    vset = {check_vertex(v) for v in vertices}
    checked = [_check_edge(e) for e in edges]
    for e in checked:
        vset.add(e.src)
        vset.add(e.dst)
    props = {}
    for v, p in (vertex_props or {}).items():
        v = check_vertex(v)
        vset.add(v)
        props[v] = dict(p)
    return PropertyGraph(tuple(sorted(vset)), _sort_key_edges(checked), directed, props, tuple(sources))


def adjacency(graph: PropertyGraph, vertex, direction: str = "out") -> list[tuple[Edge, VertexRef]]:
    """Incident ``(edge, neighbor)`` pairs sorted by neighbor, then edge."""
    if direction not in ("out", "in", "both"):
        raise ValidationError(f"direction must be out|in|both, not {direction!r}")
    i = graph.vertex_index(vertex)
    found: list[tuple[Edge, VertexRef]] = []
    if direction in ("out", "both"):
        indptr, ids = graph.out_csr
        found.extend((graph.edges[k], graph.edges[k].dst) for k in ids[indptr[i]:indptr[i + 1]])
    if direction in ("in", "both"):
        indptr, ids = graph.in_csr
        found.extend((graph.edges[k], graph.edges[k].src) for k in ids[indptr[i]:indptr[i + 1]])
    found.sort(key=lambda pair: (pair[1], pair[0]))
    return found


def degree(graph: PropertyGraph, vertex) -> int:
    i = graph.vertex_index(vertex)
    out_ptr, _ = graph.out_csr
    in_ptr, _ = graph.in_csr
    return int(out_ptr[i + 1] - out_ptr[i] + in_ptr[i + 1] - in_ptr[i])


@dataclass(frozen=True)
class DegreeCapReport:
    cap: int
    edges_before: int
    edges_after: int
    lost_percentage: float
    per_label: dict[str, tuple[int, int]] = field(default_factory=dict)


def _rank_within_groups(keys: np.ndarray) -> np.ndarray:
    """Position of each element inside its run of equal (sorted) keys."""
    if keys.size == 0:
        return keys.astype(np.int64)
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    lengths = np.diff(np.r_[starts, keys.size])
    return np.arange(keys.size) - np.repeat(starts, lengths)


def degree_cap(graph: PropertyGraph, cap: int) -> tuple[PropertyGraph, DegreeCapReport]:
    """Bound every vertex's out- and in-degree by ``cap``.

    Each over-cap vertex keeps the ``cap`` edges whose neighbor sorts lowest.
    Out-degrees are capped first, then in-degrees on what survived. All
    vertices are kept, including ones left isolated.
    """
    if isinstance(cap, bool) or not isinstance(cap, (int, np.integer)) or cap < 1:
        raise ValidationError(f"cap must be a positive integer, got {cap!r}")
    # edges are sorted by (src, dst, label): ranks within src runs follow neighbor order
    keep_out = np.flatnonzero(_rank_within_groups(graph.src_idx) < cap)
    order = keep_out[np.lexsort((keep_out, graph.dst_idx[keep_out]))]
    survivors = order[_rank_within_groups(graph.dst_idx[order]) < cap]
    survivors.sort()

    if survivors.size == graph.edge_count:
        capped = graph
    else:
        edges = tuple(graph.edges[k] for k in survivors)
        capped = PropertyGraph(graph.vertices, edges, graph.directed, graph.vertex_props, graph.sources, graph.index)

    before = Counter(e.elabel for e in graph.edges)
    after = Counter(e.elabel for e in capped.edges)
    n0, n1 = graph.edge_count, capped.edge_count
    report = DegreeCapReport(
        cap=int(cap),
        edges_before=n0,
        edges_after=n1,
        lost_percentage=(1 - n1 / n0) if n0 else 0.0,
        per_label={lab: (before[lab], after[lab]) for lab in sorted(before)},
    )
    return capped, report
