"""The two execution engines and a uniform way to call either one."""

from __future__ import annotations

from ..errors import ValidationError
from ..graph import PropertyGraph
from .local import (
    connected_components_local,
    count_components_local,
    pagerank_local,
    two_hop_match_local,
)
from .parallel import (
    PartitionedGraph,
    SuperstepStats,
    connected_components_parallel,
    count_components_parallel,
    pagerank_parallel,
    partition,
    resolve_workers,
    two_hop_match_parallel,
)
from .results import ColumnarAssignment, ComponentLabeling, MotifBinding

ENGINES = ("local", "parallel")
# independent of worker count so results do not depend on the pool size
DEFAULT_PARTITIONS = 8


def _check(engine: str) -> None:
    if engine not in ENGINES:
        raise ValidationError(f"engine must be one of {ENGINES}, got {engine!r}")


def _partitions(graph: PropertyGraph, partitions: int | None) -> PartitionedGraph:
    return partition(graph, partitions or DEFAULT_PARTITIONS)


def run_components(graph, engine, *, count_only=False, workers=None, partitions=None):
    """Full labeling, or just the count when ``count_only``."""
    _check(engine)
    if engine == "local":
        return count_components_local(graph) if count_only else connected_components_local(graph)
    pg = _partitions(graph, partitions)
    if count_only:
        return count_components_parallel(pg, workers)
    return connected_components_parallel(pg, workers)


def run_two_hop(graph, engine, endpoint_type, via_types, *, workers=None, partitions=None):
    _check(engine)
    if engine == "local":
        return two_hop_match_local(graph, endpoint_type, via_types)
    return two_hop_match_parallel(_partitions(graph, partitions), endpoint_type, via_types, workers)


def run_pagerank(graph, engine, damping, max_iters, tol, *, workers=None, partitions=None, history=None):
    _check(engine)
    if engine == "local":
        return pagerank_local(graph, damping, max_iters, tol, history)
    pg = _partitions(graph, partitions)
    return pagerank_parallel(pg, damping, max_iters, tol, workers, history)


__all__ = [
    "DEFAULT_PARTITIONS",
    "ENGINES",
    "ColumnarAssignment",
    "ComponentLabeling",
    "MotifBinding",
    "PartitionedGraph",
    "SuperstepStats",
    "connected_components_local",
    "connected_components_parallel",
    "count_components_local",
    "count_components_parallel",
    "pagerank_local",
    "pagerank_parallel",
    "partition",
    "resolve_workers",
    "run_components",
    "run_pagerank",
    "run_two_hop",
    "two_hop_match_local",
    "two_hop_match_parallel",
]
