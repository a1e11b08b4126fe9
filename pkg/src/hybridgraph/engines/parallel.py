"""Partitioned, bulk-synchronous processing engine.

The edge table is hash-partitioned on the source vertex. Every superstep runs
one task per partition on a worker pool; tasks read only immutable inputs and
return message batches, and the driver merges those batches in partition
order once all tasks have finished (the barrier). Results come back as
columns rather than per-row records.

Partition function, stable across runs and platforms::

    h(vtype, vid) = splitmix64(fnv1a64(utf8(vtype)) XOR vid)
    partition     = h mod k
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from ..errors import ValidationError
from ..graph import PropertyGraph, VertexRef
from . import _kernels
from .local import DEFAULT_DAMPING, DEFAULT_MAX_ITERS, DEFAULT_TOL, check_pagerank_args
from .results import ColumnarAssignment, ComponentLabeling, MotifBinding

WORKERS_ENV = "HYBRIDGRAPH_WORKERS"

_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def splitmix64(x: np.ndarray) -> np.ndarray:
    z = x.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def vertex_hash(graph: PropertyGraph) -> np.ndarray:
    type_hash = np.array([fnv1a64(t.encode("utf-8")) for t in graph.vtypes], dtype=np.uint64)
    return splitmix64(type_hash[graph.type_codes] ^ graph.vids)


def vertex_partition(graph: PropertyGraph, k: int) -> np.ndarray:
    return (vertex_hash(graph) % np.uint64(k)).astype(np.int64)


def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, else ``HYBRIDGRAPH_WORKERS``, else CPU count."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValidationError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ValidationError(f"worker count must be >= 1, got {workers}")
    return workers


@dataclass(frozen=True)
class EdgeTable:
    edge_ids: np.ndarray  # positions in graph.edges
    src: np.ndarray
    dst: np.ndarray

    def __len__(self) -> int:
        return len(self.edge_ids)


@dataclass(frozen=True)
class PartitionedGraph:
    graph: PropertyGraph
    num_partitions: int
    partitions: tuple[EdgeTable, ...]
    vertex_part: np.ndarray  # partition of every vertex under the hash

    def partition_of(self, v: VertexRef) -> int:
        return int(self.vertex_part[self.graph.vertex_index(v)])


@dataclass(frozen=True)
class SuperstepStats:
    superstep: int
    messages: int
    changed: int
    wall_ms: float


def partition(graph: PropertyGraph, k: int) -> PartitionedGraph:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"partition count must be a positive integer, got {k!r}")
    vpart = vertex_partition(graph, k)
    epart = vpart[graph.src_idx]
    order = np.argsort(epart, kind="stable")
    bounds = np.searchsorted(epart[order], np.arange(k + 1))
    tables = []
    for p in range(k):
        ids = order[bounds[p]:bounds[p + 1]]
        tables.append(EdgeTable(ids, graph.src_idx[ids], graph.dst_idx[ids]))
    return PartitionedGraph(graph, int(k), tuple(tables), vpart)


class _Barrier:
    """Runs one task per partition and returns results in partition order."""

    def __init__(self, workers: int | None):
        self.workers = resolve_workers(workers)
        self.pool = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None

    def map(self, fn: Callable, items: Iterable) -> list:
        if self.pool is None:
            return [fn(x) for x in items]
        return list(self.pool.map(fn, items))

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()


def _hashmin(pg: PartitionedGraph, workers, stats, observe) -> np.ndarray:
    """Synchronous min-label propagation to a fixed point; returns the labels."""
    n = pg.graph.vertex_count
    labels = np.arange(n, dtype=np.int64)
    active = np.ones(n, dtype=np.bool_)
    with _Barrier(workers) as bsp:
        incidence = bsp.map(lambda t: _kernels.local_incidence(n, t.src, t.dst), pg.partitions)
        step = 0
        while True:
            t0 = time.perf_counter()
            results = bsp.map(lambda inc: _kernels.hashmin_step(labels, active, *inc), incidence)
            # barrier: every partition has proposed before any label moves
            next_active = np.zeros(n, dtype=np.bool_)
            changed = 0
            for ids, vals, _ in results:
                changed += _kernels.merge_min(labels, next_active, ids, vals)
            step += 1
            if stats is not None:
                sent = sum(r[2] for r in results)
                stats.append(SuperstepStats(step, int(sent), int(changed), (time.perf_counter() - t0) * 1e3))
            if observe is not None:
                observe(step, labels.copy())
            if changed == 0:
                return labels
            active = next_active


def connected_components_parallel(
    pg: PartitionedGraph,
    workers: int | None = None,
    stats: list | None = None,
    observe: Callable[[int, np.ndarray], None] | None = None,
) -> ComponentLabeling:
    """Components by min-label propagation; representatives are component minima.

    ``stats`` collects one :class:`SuperstepStats` per superstep; ``observe``
    is called with a copy of the label column after each barrier.
    """
    labels = _hashmin(pg, workers, stats, observe)
    g = pg.graph
    count = int(np.count_nonzero(labels == np.arange(g.vertex_count)))
    return ComponentLabeling(ColumnarAssignment(g.vertices, g.index, labels), count)


def count_components_parallel(pg: PartitionedGraph, workers: int | None = None, stats: list | None = None) -> int:
    labels = _hashmin(pg, workers, stats, None)
    return int(np.count_nonzero(labels == np.arange(pg.graph.vertex_count)))


def two_hop_match_parallel(
    pg: PartitionedGraph, endpoint_type: str, via_types: Iterable[str], workers: int | None = None
) -> list[MotifBinding]:
    """Self-join of endpoint -> via incidences keyed on the via vertex.

    Map: each partition emits (via, endpoint) rows bucketed by the via
    vertex's hash partition. Shuffle: buckets are concatenated in partition
    order. Reduce: each bucket sorts its rows and pairs up endpoints per via.
    """
    g = pg.graph
    is_end = g.type_mask([endpoint_type])
    is_via = g.type_mask(via_types)
    k = pg.num_partitions

    def map_side(t: EdgeTable):
        keep = is_end[t.src] & is_via[t.dst]
        via, user = t.dst[keep], t.src[keep]
        dest = pg.vertex_part[via]
        order = np.argsort(dest, kind="stable")
        bounds = np.searchsorted(dest[order], np.arange(k + 1))
        return [(via[order[bounds[p]:bounds[p + 1]]], user[order[bounds[p]:bounds[p + 1]]]) for p in range(k)]

    def reduce_side(bucket):
        via = np.concatenate([b[0] for b in bucket])
        user = np.concatenate([b[1] for b in bucket])
        if via.size == 0:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty, empty
        codes = np.unique(via * g.vertex_count + user)
        return _kernels.group_pairs(codes // g.vertex_count, codes % g.vertex_count)

    with _Barrier(workers) as bsp:
        emitted = bsp.map(map_side, pg.partitions)
        buckets = [[emitted[src][dst] for src in range(k)] for dst in range(k)]
        reduced = bsp.map(reduce_side, buckets)

    a = np.concatenate([r[0] for r in reduced])
    via = np.concatenate([r[1] for r in reduced])
    b = np.concatenate([r[2] for r in reduced])
    order = np.lexsort((via, b, a))
    vs = g.vertices
    return [MotifBinding(vs[x], vs[y], vs[z]) for x, y, z in zip(a[order].tolist(), via[order].tolist(), b[order].tolist())]


def pagerank_parallel(
    pg: PartitionedGraph,
    damping: float = DEFAULT_DAMPING,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    workers: int | None = None,
    history: list | None = None,
) -> dict[VertexRef, float]:
    """One superstep per power iteration; partial rank vectors summed at the barrier."""
    check_pagerank_args(damping, max_iters, tol)
    g = pg.graph
    n = g.vertex_count
    if n == 0:
        return {}
    k = pg.num_partitions

    def links(t: EdgeTable):
        # every (src, dst) pair with a given src lives in that src's partition
        codes = np.unique(t.src * n + t.dst)
        return codes // n, codes % n

    with _Barrier(workers) as bsp:
        tables = bsp.map(links, pg.partitions)
        if not g.directed:
            # reversed links belong to the partition of their new source
            rev = [[] for _ in range(k)]
            for s, d in tables:
                dest = pg.vertex_part[d]
                for p in range(k):
                    sel = dest == p
                    rev[p].append((d[sel], s[sel]))
            merged = []
            for p, (s, d) in enumerate(tables):
                s2 = np.concatenate([s] + [x[0] for x in rev[p]])
                d2 = np.concatenate([d] + [x[1] for x in rev[p]])
                codes = np.unique(s2 * n + d2)
                merged.append((codes // n, codes % n))
            tables = merged

        def prepare(tbl):
            s, d = tbl
            targets, local_dst = np.unique(d, return_inverse=True)
            return s, local_dst, targets

        prepared = bsp.map(prepare, tables)
        outdeg = np.zeros(n)
        for s, _, _ in prepared:
            outdeg += np.bincount(s, minlength=n)
        dangling = outdeg == 0
        inv = np.divide(1.0, outdeg, out=np.zeros(n), where=~dangling)

        rank = np.full(n, 1.0 / n)
        for _ in range(int(max_iters)):
            share = rank * inv
            partials = bsp.map(
                lambda p: np.bincount(p[1], weights=share[p[0]], minlength=p[2].size), prepared
            )
            spread = np.zeros(n)
            for (_, _, targets), part in zip(prepared, partials):
                spread[targets] += part
            new = (1.0 - damping) / n + damping * (spread + rank[dangling].sum() / n)
            delta = np.abs(new - rank).sum()
            rank = new
            if history is not None:
                history.append(float(rank.sum()))
            if delta < tol:
                break
    return dict(zip(g.vertices, rank.tolist()))
