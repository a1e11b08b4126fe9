"""Edge-snapshot ingestion, snapshot merging, and result persistence.

Snapshot wire format, one edge per line, UTF-8::

    src_vtype:src_vid<TAB>dst_vtype:dst_vid[<TAB>label]

Blank lines and lines starting with ``#`` are skipped. Manifest files list one
snapshot per line as ``path<TAB>identifier_type``; relative paths resolve
against the manifest's directory.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import IngestError, ValidationError
from .graph import DEFAULT_EDGE_LABEL, Edge, PropertyGraph, VertexRef, build_graph, check_vertex

log = logging.getLogger(__name__)

DEFAULT_MAX_REJECT_FRACTION = 0.01
DELIMITERS = {"tab": "\t", "comma": ",", "space": " "}


@dataclass(frozen=True)
class Reject:
    line_no: int
    text: str
    reason: str


@dataclass
class EdgeSnapshot:
    name: str
    identifier_type: str
    edges: list[Edge]
    rejects: list[Reject] = field(default_factory=list)
    lines_total: int = 0  # non-empty, non-comment lines

    def __post_init__(self):
        for e in self.edges:
            if e.dst.vtype != self.identifier_type:
                raise ValidationError(
                    f"snapshot {self.name!r}: edge {e} does not end at a {self.identifier_type!r} vertex"
                )


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    identifier_type: str
    delimiter: str = "\t"


@dataclass(frozen=True)
class SnapshotManifest:
    entries: tuple[ManifestEntry, ...]
    output: Path | None = None

    def __post_init__(self):
        if not self.entries:
            raise ValidationError("manifest lists no snapshots")


def _parse_line(line: str, delimiter: str, identifier_type: str) -> Edge:
    fields = line.split(delimiter)
    if len(fields) not in (2, 3):
        raise ValidationError(f"expected 2 or 3 fields, found {len(fields)}")
    src = VertexRef.parse(fields[0].strip())
    dst = VertexRef.parse(fields[1].strip())
    if dst.vtype != identifier_type:
        raise ValidationError(f"destination type {dst.vtype!r} is not {identifier_type!r}")
    label = fields[2].strip() if len(fields) == 3 else DEFAULT_EDGE_LABEL
    if not label:
        raise ValidationError("empty edge label")
    return Edge(src, dst, label)


def read_snapshot(
    path,
    identifier_type: str,
    *,
    name: str | None = None,
    delimiter: str = "\t",
    max_reject_fraction: float = DEFAULT_MAX_REJECT_FRACTION,
) -> EdgeSnapshot:
    """Parse one snapshot file, logging malformed lines instead of failing.

    Raises :class:`IngestError` when rejected lines exceed
    ``max_reject_fraction`` of the data lines.
    """
    path = Path(path)
    check_vertex((identifier_type, 0))
    edges: list[Edge] = []
    rejects: list[Reject] = []
    total = 0
    with path.open(encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            total += 1
            try:
                edges.append(_parse_line(line, delimiter, identifier_type))
            except ValidationError as exc:
                rejects.append(Reject(line_no, line, str(exc)))
    if total and len(rejects) / total > max_reject_fraction:
        raise IngestError(
            f"{path}: {len(rejects)} of {total} lines rejected, above the "
            f"{max_reject_fraction:.2%} limit (first at line {rejects[0].line_no}: {rejects[0].reason})",
            rejects,
        )
    for r in rejects:
        log.warning("reject file=%s line=%d reason=%s", path, r.line_no, r.reason)
    return EdgeSnapshot(name or path.stem, identifier_type, edges, rejects, total)


def read_manifest(path) -> SnapshotManifest:
    path = Path(path)
    entries = []
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) not in (2, 3) or not fields[1].strip():
            raise ValidationError(f"{path}:{line_no}: expected 'path<TAB>identifier_type[<TAB>delimiter]'")
        delim = DELIMITERS.get(fields[2].strip(), fields[2]) if len(fields) == 3 else "\t"
        entry_path = Path(fields[0].strip())
        if not entry_path.is_absolute():
            entry_path = path.parent / entry_path
        entries.append(ManifestEntry(entry_path, fields[1].strip(), delim))
    return SnapshotManifest(tuple(entries))


def load_snapshots(
    manifest: SnapshotManifest,
    workers: int = 1,
    max_reject_fraction: float = DEFAULT_MAX_REJECT_FRACTION,
) -> list[EdgeSnapshot]:
    """Read every manifest entry, one worker per file, in manifest order."""

    def read(entry: ManifestEntry) -> EdgeSnapshot:
        return read_snapshot(
            entry.path, entry.identifier_type, delimiter=entry.delimiter, max_reject_fraction=max_reject_fraction
        )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        snapshots = list(pool.map(read, manifest.entries))
    names = [s.name for s in snapshots]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValidationError(f"snapshot names must be unique within a run: {dupes}")
    return snapshots


def merge_snapshots(snapshots: Iterable[EdgeSnapshot]) -> PropertyGraph:
    """Union snapshots into one directed user -> identifier graph."""
    snapshots = list(snapshots)
    if not snapshots:
        raise ValidationError("merge_snapshots needs at least one snapshot")
    edges = [e for s in snapshots for e in s.edges]
    sources = tuple(sorted((s.name, len(s.edges)) for s in snapshots))
    return build_graph((), edges, directed=True, sources=sources)


def format_edge(e: Edge) -> str:
    if e.elabel == DEFAULT_EDGE_LABEL:
        return f"{e.src}\t{e.dst}"
    return f"{e.src}\t{e.dst}\t{e.elabel}"


def write_edges(edges: Iterable[Edge], path) -> None:
    """Write edges in snapshot wire format, sorted."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for e in sorted(edges):
            fh.write(format_edge(e) + "\n")


def write_snapshot(snapshot: EdgeSnapshot, path) -> None:
    write_edges(snapshot.edges, path)


def _write_csv(path, header: tuple[str, str], rows) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path, header: tuple[str, str]) -> list[tuple[VertexRef, VertexRef]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != header:
        raise ValidationError(f"{path}: expected header {','.join(header)}")
    return [(VertexRef.parse(a), VertexRef.parse(b)) for a, b in rows[1:]]


LABELING_HEADER = ("user_id", "component_id")
PAIRS_HEADER = ("user_a", "user_b")


def persist_labeling(labeling, path) -> None:
    """Write ``user_id,component_id`` rows sorted by vertex."""
    assignment = getattr(labeling, "assignment", labeling)
    rows = ((str(v), str(assignment[v])) for v in sorted(assignment))
    _write_csv(path, LABELING_HEADER, rows)


def read_labeling(path) -> dict[VertexRef, VertexRef]:
    return dict(_read_csv(path, LABELING_HEADER))


def persist_pairs(pairs: Iterable[tuple[VertexRef, VertexRef]], path) -> None:
    """Write unordered pairs as ``user_a,user_b`` with user_a < user_b, sorted."""
    canon = sorted({(a, b) if a < b else (b, a) for a, b in pairs})
    _write_csv(path, PAIRS_HEADER, ((str(a), str(b)) for a, b in canon))


def read_pairs(path) -> list[tuple[VertexRef, VertexRef]]:
    return _read_csv(path, PAIRS_HEADER)


def write_key_values(values: Mapping[str, object], path) -> None:
    """Line-oriented ``key=value`` sidecar, keys in insertion order."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for k, v in values.items():
            fh.write(f"{k}={v}\n")


def read_key_values(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            k, sep, v = line.partition("=")
            if not sep:
                raise ValidationError(f"{path}: malformed key=value line {line!r}")
            out[k.strip()] = v.strip()
    return out
