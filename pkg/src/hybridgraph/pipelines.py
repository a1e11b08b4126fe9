"""Multi-account detection and combined connected users, end to end.

Both combined-connected-users strategies are kept: ``unified`` computes
components once over the merged graph; ``legacy`` computes them per snapshot
and then stitches the per-snapshot results together through a user-only
graph. They must agree exactly.
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .engines import ENGINES, ComponentLabeling, run_components, run_two_hop
from .errors import ValidationError
from .etl import EdgeSnapshot, merge_snapshots
from .graph import DegreeCapReport, PropertyGraph, VertexRef, build_graph, degree_cap
from .router import GraphStats, RouterConfig, choose_engine

log = logging.getLogger(__name__)

USER_TYPE = "user"


@dataclass
class SameUserPairs:
    pairs: list[tuple[VertexRef, VertexRef]]
    grouping: dict[VertexRef, list[VertexRef]]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[VertexRef, VertexRef]]) -> "SameUserPairs":
        canon = sorted({(a, b) if a < b else (b, a) for a, b in pairs if a != b})
        grouping: dict[VertexRef, list[VertexRef]] = {}
        for a, b in canon:
            grouping.setdefault(a, []).append(b)
            grouping.setdefault(b, []).append(a)
        return cls(canon, {u: sorted(vs) for u, vs in sorted(grouping.items())})


@dataclass
class PipelineResult:
    payload: object
    strategy: str
    engine: str
    wall_ms: float
    snapshots: tuple[str, ...]
    cap: int | None = None
    cap_report: DegreeCapReport | None = None
    route_reasons: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict)

    def provenance(self, include_timing: bool = True) -> dict[str, object]:
        out: dict[str, object] = {
            "strategy": self.strategy,
            "engine": self.engine,
            "route_reasons": ",".join(self.route_reasons) or "explicit",
            "snapshots": ",".join(self.snapshots),
            "cap": "none" if self.cap is None else self.cap,
        }
        if self.cap_report is not None:
            r = self.cap_report
            out.update(
                cap_edges_before=r.edges_before,
                cap_edges_after=r.edges_after,
                cap_lost_percentage=f"{r.lost_percentage:.6f}",
            )
        out.update(self.extra)
        if include_timing:
            out["wall_ms"] = f"{self.wall_ms:.3f}"
        return out


def _check_snapshots(snapshots) -> list[EdgeSnapshot]:
    snapshots = list(snapshots)
    if not snapshots:
        raise ValidationError("at least one snapshot is required")
    return snapshots


def _pick_engine(engine: str, stats: GraphStats, router_config: RouterConfig | None) -> tuple[str, tuple[str, ...]]:
    if engine == "auto":
        choice = choose_engine(stats, router_config)
        log.info("route engine=%s reasons=%s", choice.engine, ",".join(choice.reasons))
        return choice.engine, choice.reasons
    if engine not in ENGINES:
        raise ValidationError(f"engine must be local, parallel or auto, got {engine!r}")
    return engine, ()


def motif_output_bound(graph: PropertyGraph, endpoint_type: str, via_types: Iterable[str]) -> int:
    """Exact binding count: sum over via vertices of C(endpoint in-degree, 2)."""
    keep = graph.type_mask([endpoint_type])[graph.src_idx] & graph.type_mask(via_types)[graph.dst_idx]
    deg = np.bincount(graph.dst_idx[keep], minlength=graph.vertex_count).astype(np.int64)
    return int((deg * (deg - 1) // 2).sum())


def identifier_types(graph: PropertyGraph, user_type: str = USER_TYPE) -> set[str]:
    return {t for t in graph.vtypes if t != user_type}


def multi_account_detection(
    snapshots: Iterable[EdgeSnapshot],
    cap: int | None = None,
    engine: str = "auto",
    *,
    via_types: Iterable[str] | None = None,
    user_type: str = USER_TYPE,
    workers: int | None = None,
    partitions: int | None = None,
    router_config: RouterConfig | None = None,
) -> PipelineResult:
    """Users directly linked through one shared identifier."""
    t0 = time.perf_counter()
    snapshots = _check_snapshots(snapshots)
    graph = merge_snapshots(snapshots)
    report = None
    if cap is not None:
        graph, report = degree_cap(graph, cap)
        log.info("stage=degree_cap cap=%d lost_percentage=%.6f", cap, report.lost_percentage)
    vias = set(via_types) if via_types is not None else identifier_types(graph, user_type)
    stats = GraphStats(graph.vertex_count, graph.edge_count, "motif_full", motif_output_bound(graph, user_type, vias))
    chosen, reasons = _pick_engine(engine, stats, router_config)
    bindings = run_two_hop(graph, chosen, user_type, vias, workers=workers, partitions=partitions)
    payload = SameUserPairs.from_pairs((m.a, m.b) for m in bindings)
    return PipelineResult(
        payload,
        "unified",
        chosen,
        (time.perf_counter() - t0) * 1e3,
        tuple(s.name for s in snapshots),
        cap,
        report,
        reasons,
        {"via_types": ",".join(sorted(vias))},
    )


def _components_stats(graph: PropertyGraph, count_only: bool) -> GraphStats:
    if count_only:
        return GraphStats(graph.vertex_count, graph.edge_count, "components_count", 1)
    return GraphStats(graph.vertex_count, graph.edge_count, "components_full", graph.vertex_count)


def _users_only(labeling: ComponentLabeling, user_type: str) -> ComponentLabeling:
    return labeling.restrict(user_type)


def combined_connected_users_unified(
    snapshots: Iterable[EdgeSnapshot],
    engine: str = "auto",
    *,
    user_type: str = USER_TYPE,
    workers: int | None = None,
    partitions: int | None = None,
    router_config: RouterConfig | None = None,
) -> PipelineResult:
    """Components over one merged graph, reported for user vertices only."""
    t0 = time.perf_counter()
    snapshots = _check_snapshots(snapshots)
    graph = merge_snapshots(snapshots)
    chosen, reasons = _pick_engine(engine, _components_stats(graph, False), router_config)
    labeling = run_components(graph, chosen, workers=workers, partitions=partitions)
    payload = _users_only(labeling, user_type)
    return PipelineResult(
        payload, "unified", chosen, (time.perf_counter() - t0) * 1e3, tuple(s.name for s in snapshots), route_reasons=reasons
    )


def combined_connected_users_legacy(
    snapshots: Iterable[EdgeSnapshot],
    engine: str = "auto",
    *,
    user_type: str = USER_TYPE,
    workers: int | None = None,
    partitions: int | None = None,
    router_config: RouterConfig | None = None,
) -> PipelineResult:
    """Per-snapshot components, then components of a meta-graph linking each
    user to its per-snapshot component minimum.

    Identifier vertices that occur in more than one snapshot stay in the
    meta-graph, so snapshots of the same identifier type combine correctly.
    """
    t0 = time.perf_counter()
    snapshots = _check_snapshots(snapshots)
    graphs = [merge_snapshots([s]) for s in snapshots]
    sizes = GraphStats(
        sum(g.vertex_count for g in graphs), sum(g.edge_count for g in graphs), "components_full",
        sum(g.vertex_count for g in graphs),
    )
    chosen, reasons = _pick_engine(engine, sizes, router_config)

    def per_snapshot(g: PropertyGraph) -> ComponentLabeling:
        return run_components(g, chosen, workers=workers, partitions=partitions)

    with ThreadPoolExecutor(max_workers=min(len(graphs), 4)) as pool:
        labelings = list(pool.map(per_snapshot, graphs))

    # identifiers seen in several snapshots (e.g. two daily email dumps) still connect them
    seen = Counter(v for g in graphs for v in g.vertices if v.vtype != user_type)
    shared = {v for v, c in seen.items() if c > 1}

    # each vertex is linked to the minimum user of its per-snapshot component
    users = set()
    links = []
    for lab in labelings:
        min_user: dict[VertexRef, VertexRef] = {}
        for u in sorted(v for v in lab.assignment if v.vtype == user_type):
            users.add(u)
            rep = min_user.setdefault(lab.assignment[u], u)
            if u != rep:
                links.append((u, rep, "same_component"))
        for x in shared.intersection(lab.assignment):
            rep = min_user.get(lab.assignment[x])
            if rep is not None:
                links.append((x, rep, "same_component"))
    meta = build_graph(users, links, directed=False)
    payload = _users_only(run_components(meta, chosen, workers=workers, partitions=partitions), user_type)
    return PipelineResult(
        payload, "legacy", chosen, (time.perf_counter() - t0) * 1e3, tuple(s.name for s in snapshots), route_reasons=reasons
    )


def combined_connected_users(snapshots, strategy: str = "unified", engine: str = "auto", **kwargs) -> PipelineResult:
    if strategy == "unified":
        return combined_connected_users_unified(snapshots, engine, **kwargs)
    if strategy == "legacy":
        return combined_connected_users_legacy(snapshots, engine, **kwargs)
    raise ValidationError(f"strategy must be legacy or unified, got {strategy!r}")


def count_connected_users(
    snapshots: Iterable[EdgeSnapshot],
    strategy: str = "unified",
    engine: str = "auto",
    *,
    user_type: str = USER_TYPE,
    workers: int | None = None,
    partitions: int | None = None,
    router_config: RouterConfig | None = None,
) -> PipelineResult:
    """Number of user components, without materializing per-user rows.

    Every snapshot edge touches a user, so components of the merged graph
    and user components coincide for the unified strategy.
    """
    if strategy == "legacy":
        res = combined_connected_users_legacy(
            snapshots, engine, user_type=user_type, workers=workers, partitions=partitions, router_config=router_config
        )
        res.payload = res.payload.component_count
        return res
    if strategy != "unified":
        raise ValidationError(f"strategy must be legacy or unified, got {strategy!r}")
    t0 = time.perf_counter()
    snapshots = _check_snapshots(snapshots)
    graph = merge_snapshots(snapshots)
    chosen, reasons = _pick_engine(engine, _components_stats(graph, True), router_config)
    count = run_components(graph, chosen, count_only=True, workers=workers, partitions=partitions)
    return PipelineResult(
        count, "unified", chosen, (time.perf_counter() - t0) * 1e3, tuple(s.name for s in snapshots), route_reasons=reasons
    )
