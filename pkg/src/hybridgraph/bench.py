"""Synthetic snapshot generation, engine sweeps, loss curves, router calibration.

Generator algorithm (reproducible from this description alone):

* ``rng = numpy.random.Generator(numpy.random.PCG64(seed))``
* identifier rank ``r`` (0-based) has weight ``(r + 1) ** -degree_skew``
* in rounds, draw ``m`` users with ``rng.integers(0, n_users, m)`` and then
  ``m`` identifiers with ``rng.choice(n_identifiers, m, p=weights)``, where
  ``m = 2 * remaining + 16``; keep pairs in draw order, skipping any pair
  already kept, until ``n_edges`` pairs exist
* after 64 rounds without finishing, the rest is drawn uniformly without
  replacement from the pairs not yet kept
* identifier ``i`` is vertex ``(identifier_types[i % T], i)``; user ``u`` is
  ``("user", u)``
"""

from __future__ import annotations

import csv
import math
import os
import platform
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .engines import ENGINES, resolve_workers, run_components, run_pagerank, run_two_hop
from .errors import CalibrationError, CorrectnessError, ValidationError
from .etl import EdgeSnapshot, merge_snapshots
from .graph import Edge, PropertyGraph, VertexRef, degree_cap
from .pipelines import USER_TYPE, identifier_types
from .router import QUERY_KINDS, GraphStats, RouterConfig, choose_engine

PAGERANK_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SyntheticSpec:
    n_users: int
    n_identifiers: int
    n_edges: int
    degree_skew: float = 0.0
    seed: int = 0
    identifier_types: tuple[str, ...] = ("email", "phone")

    def validate(self) -> None:
        if min(self.n_users, self.n_identifiers, self.n_edges) < 0:
            raise ValidationError(f"counts must be non-negative: {self}")
        if self.n_edges > self.n_users * self.n_identifiers:
            raise ValidationError(
                f"n_edges={self.n_edges} exceeds n_users * n_identifiers = {self.n_users * self.n_identifiers}"
            )
        if self.degree_skew < 0:
            raise ValidationError("degree_skew must be >= 0")
        if not self.identifier_types:
            raise ValidationError("at least one identifier type is required")


def sweep_spec(n_users: int, seed: int = 7) -> SyntheticSpec:
    """Default workload for one sweep scale.

    As many identifiers as users and 0.75 edges per user, which leaves fewer
    edges than vertices, like production user-identifier snapshots.
    """
    return SyntheticSpec(n_users, max(1, n_users), max(1, (3 * n_users) // 4), degree_skew=0.5, seed=seed)


def loss_spec(n_users: int, seed: int = 7) -> SyntheticSpec:
    """Skewed workload for degree-cap loss tables.

    One identifier per ten users and three edges per user; at 10^5 users the
    hottest identifier has a few thousand users, so caps from 10 to 10^4 span
    heavy loss down to none.
    """
    return SyntheticSpec(n_users, max(1, n_users // 10), 3 * n_users, degree_skew=0.7, seed=seed)


def _draw_pairs(spec: SyntheticSpec) -> np.ndarray:
    n_id = spec.n_identifiers
    target = spec.n_edges
    if target == 0:
        return np.empty(0, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    weights = (np.arange(n_id, dtype=np.float64) + 1.0) ** -spec.degree_skew
    weights /= weights.sum()
    kept = np.empty(0, dtype=np.int64)
    for _ in range(64):
        m = 2 * (target - kept.size) + 16
        users = rng.integers(0, spec.n_users, m)
        idents = rng.choice(n_id, m, p=weights)
        codes = np.concatenate([kept, users.astype(np.int64) * n_id + idents])
        _, first = np.unique(codes, return_index=True)
        kept = codes[np.sort(first)][:target]
        if kept.size == target:
            return kept
    missing = np.setdiff1d(np.arange(spec.n_users * n_id, dtype=np.int64), kept)
    fill = rng.choice(missing, target - kept.size, replace=False)
    return np.concatenate([kept, fill])


def generate(spec: SyntheticSpec) -> list[EdgeSnapshot]:
    """One snapshot per identifier type; edges sorted, no duplicates."""
    spec.validate()
    codes = np.sort(_draw_pairs(spec))
    users, idents = np.divmod(codes, max(spec.n_identifiers, 1))
    types = spec.identifier_types
    user_refs: dict[int, VertexRef] = {}
    per_type: dict[str, list[Edge]] = {t: [] for t in types}
    for u, i in zip(users.tolist(), idents.tolist()):
        src = user_refs.get(u)
        if src is None:
            src = user_refs[u] = VertexRef(USER_TYPE, u)
        t = types[i % len(types)]
        per_type[t].append(Edge(src, VertexRef(t, i)))
    return [EdgeSnapshot(f"{t}-synthetic-s{spec.seed}", t, sorted(per_type[t])) for t in types]


def synthetic_graph(spec: SyntheticSpec) -> PropertyGraph:
    return merge_snapshots(generate(spec))


# queries: each returns (result, output_rows)


def _q_components_full(graph, engine, workers, k):
    lab = run_components(graph, engine, workers=workers, partitions=k)
    return lab, len(lab)


def _q_components_count(graph, engine, workers, k):
    return run_components(graph, engine, count_only=True, workers=workers, partitions=k), 1


def _q_motif(graph, engine, workers, k):
    res = run_two_hop(graph, engine, USER_TYPE, identifier_types(graph), workers=workers, partitions=k)
    return res, len(res)


def _q_pagerank(graph, engine, workers, k):
    res = run_pagerank(graph, engine, 0.85, 100, 1e-8, workers=workers, partitions=k)
    return res, len(res)


QUERIES: dict[str, Callable] = {
    "components_full": _q_components_full,
    "components_count": _q_components_count,
    "motif_full": _q_motif,
    "pagerank": _q_pagerank,
}


def results_agree(query_kind: str, a, b) -> bool:
    if query_kind == "pagerank":
        return a.keys() == b.keys() and all(abs(a[v] - b[v]) <= PAGERANK_TOLERANCE for v in a)
    return a == b


@dataclass(frozen=True)
class BenchRow:
    query_kind: str
    scale: int  # vertex count of the benchmarked graph
    engine: str
    median_ms: float
    output_rows: int
    n_users: int = 0
    runs_ms: tuple[float, ...] = ()


@dataclass
class BenchmarkReport:
    rows: list[BenchRow]
    crossover_scale: int | None = None
    host: str = ""
    crossovers: dict[str, int] = field(default_factory=dict)

    def winners(self, query_kind: str) -> dict[int, str]:
        """Fastest engine per scale for one query kind."""
        best: dict[int, BenchRow] = {}
        for r in self.rows:
            if r.query_kind == query_kind and (r.scale not in best or r.median_ms < best[r.scale].median_ms):
                best[r.scale] = r
        return {s: best[s].engine for s in sorted(best)}

    def row(self, query_kind: str, scale: int, engine: str) -> BenchRow:
        for r in self.rows:
            if (r.query_kind, r.scale, r.engine) == (query_kind, scale, engine):
                return r
        raise KeyError((query_kind, scale, engine))


def host_descriptor() -> str:
    return f"{platform.system()}-{platform.machine()} cpus={os.cpu_count()} python={platform.python_version()}"


def find_crossover(rows: Iterable[BenchRow], query_kind: str = "components_full") -> int | None:
    """Geometric midpoint of the flip into the final parallel-wins regime.

    Requires the local engine to win the scale just below the flip.
    """
    report = BenchmarkReport(list(rows))
    winners = report.winners(query_kind)
    scales = sorted(winners)
    if not scales or winners[scales[-1]] != "parallel":
        return None
    i = len(scales) - 1
    while i > 0 and winners[scales[i - 1]] == "parallel":
        i -= 1
    if i == 0:
        return None
    lo, hi = scales[i - 1], scales[i]
    return min(hi, max(lo + 1, int(round(math.sqrt(lo * hi)))))


def run_sweep(
    scales: Sequence[SyntheticSpec],
    queries: Sequence[str],
    engines: Sequence[str] = ENGINES,
    *,
    repeats: int = 3,
    workers: int | None = 4,
    partitions: int | None = None,
    timer: Callable[[], float] = time.perf_counter,
    progress: Callable[[str], None] | None = None,
) -> BenchmarkReport:
    """Time every (scale, query, engine) cell: one warm-up, median of ``repeats``.

    The parallel engine uses ``partitions`` edge partitions (default: one per
    worker) and rebuilds them inside every timed run.

    Raises :class:`CorrectnessError` when engines disagree on any cell.
    """
    if not scales or not queries or not engines:
        raise ValidationError("scales, queries and engines must all be non-empty")
    if repeats < 3:
        raise ValidationError("at least 3 timed runs per cell are required")
    for q in queries:
        if q not in QUERY_KINDS:
            raise ValidationError(f"unknown query kind {q!r}")
    for e in engines:
        if e not in ENGINES:
            raise ValidationError(f"unknown engine {e!r}")

    k = partitions or resolve_workers(workers)
    rows: list[BenchRow] = []
    for spec in scales:
        graph = synthetic_graph(spec)
        for q in queries:
            reference = None
            for engine in engines:
                result, n_rows = QUERIES[q](graph, engine, workers, k)  # warm-up, also the checked output
                if reference is None:
                    reference = (engine, result)
                elif not results_agree(q, reference[1], result):
                    raise CorrectnessError(
                        f"{q} at scale {graph.vertex_count}: {engine} output differs from {reference[0]}"
                    )
                del result
                runs = []
                for _ in range(repeats):
                    t0 = timer()
                    out = QUERIES[q](graph, engine, workers, k)
                    runs.append((timer() - t0) * 1e3)
                    del out
                rows.append(
                    BenchRow(q, graph.vertex_count, engine, statistics.median(runs), n_rows, spec.n_users, tuple(runs))
                )
                if progress:
                    progress(f"query={q} scale={graph.vertex_count} engine={engine} median_ms={statistics.median(runs):.3f}")
            del reference
    rows.sort(key=lambda r: (r.query_kind, r.scale, r.engine))
    crossovers = {q: c for q in queries if (c := find_crossover(rows, q)) is not None}
    return BenchmarkReport(rows, crossovers.get("components_full"), host_descriptor(), crossovers)


REPORT_HEADER = ("query_kind", "scale", "engine", "median_ms", "output_rows")
LONG_HEADER = ("query_kind", "scale", "n_users", "engine", "run", "ms", "output_rows")
LOSS_HEADER = ("cap", "edges_after", "lost_percentage")


def write_report_csv(report: BenchmarkReport, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in report.rows:
            w.writerow((r.query_kind, r.scale, r.engine, f"{r.median_ms:.3f}", r.output_rows))


def write_long_csv(report: BenchmarkReport, path) -> None:
    """One row per timed run, for plotting."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LONG_HEADER)
        for r in report.rows:
            for i, ms in enumerate(r.runs_ms):
                w.writerow((r.query_kind, r.scale, r.n_users, r.engine, i, f"{ms:.3f}", r.output_rows))


def read_report_csv(path) -> BenchmarkReport:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != REPORT_HEADER:
            raise ValidationError(f"{path}: expected header {','.join(REPORT_HEADER)}")
        rows = [BenchRow(q, int(s), e, float(ms), int(n)) for q, s, e, ms, n in reader]
    rows.sort(key=lambda r: (r.query_kind, r.scale, r.engine))
    kinds = sorted({r.query_kind for r in rows})
    crossovers = {q: c for q in kinds if (c := find_crossover(rows, q)) is not None}
    return BenchmarkReport(rows, crossovers.get("components_full"), "", crossovers)


@dataclass(frozen=True)
class LossRow:
    cap: int
    edges_after: int
    lost_percentage: float


def loss_curve(spec: SyntheticSpec, caps: Sequence[int]) -> list[LossRow]:
    caps = list(caps)
    if not caps:
        raise ValidationError("caps must be non-empty")
    if any(b <= a for a, b in zip(caps, caps[1:])):
        raise ValidationError(f"caps must be strictly ascending, got {caps}")
    graph = synthetic_graph(spec)
    out = []
    for c in caps:
        _, report = degree_cap(graph, c)
        out.append(LossRow(c, report.edges_after, report.lost_percentage))
    return out


def max_degree(graph: PropertyGraph) -> int:
    if graph.edge_count == 0:
        return 0
    n = graph.vertex_count
    return int(max(np.bincount(graph.src_idx, minlength=n).max(), np.bincount(graph.dst_idx, minlength=n).max()))


def write_loss_csv(rows: Iterable[LossRow], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOSS_HEADER)
        for r in rows:
            w.writerow((r.cap, r.edges_after, f"{r.lost_percentage:.6f}"))


def _measured_points(report: BenchmarkReport):
    """(vertex_count, output_rows, query_kind, winner) for every measured cell."""
    pts = []
    for q in sorted({r.query_kind for r in report.rows}):
        for scale, engine in report.winners(q).items():
            rows = {r.output_rows for r in report.rows if r.query_kind == q and r.scale == scale}
            pts.append((scale, max(rows), q, engine))
    return pts


def replay_agreement(report: BenchmarkReport, config: RouterConfig) -> float:
    """Fraction of measured cells where the router picks the measured winner."""
    pts = _measured_points(report)
    hits = sum(
        choose_engine(GraphStats(v, 0, q, rows), config).engine == winner for v, rows, q, winner in pts
    )
    return hits / len(pts) if pts else 0.0


def calibrate_router(report: BenchmarkReport, base: RouterConfig | None = None) -> RouterConfig:
    """Thresholds under which the router reproduces every measured winner."""
    base = base or RouterConfig()
    full = report.winners("components_full")
    if "local" not in full.values() or "parallel" not in full.values():
        raise CalibrationError("no components_full crossover measured; sweep a wider range of scales")
    pts = _measured_points(report)
    par = [(v, r) for v, r, _, w in pts if w == "parallel"]
    loc = [(v, r) for v, r, _, w in pts if w == "local"]

    large = min(v for v, _ in par)
    below = [v for v, _ in loc if v < large]
    small = max(below) if below else large - 1
    # local winners at or above the scale cut can only be reached through the output rule
    need_out = max((r for v, r in loc if v > small), default=None)
    max_out = min(r for _, r in par) - 1
    if need_out is None:
        out_threshold = min(base.small_output_row_threshold, max_out)
    else:
        out_threshold = need_out
    if out_threshold < 1 or out_threshold > max_out:
        raise CalibrationError("measured winners are not separable by output size and scale thresholds")
    config = RouterConfig(small, large, out_threshold)
    if replay_agreement(report, config) < 1.0:
        raise CalibrationError("no threshold setting agrees with every measured winner; sweep more scales")
    return config
