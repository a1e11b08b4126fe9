"""Command-line entry point.

Every subcommand writes its results to the path given by ``--out`` and a run
manifest next to it (``<out>.run``), which ``hybridgraph replay`` can
re-execute. Logs go to stderr, one line per stage.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal or
correctness error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from . import bench, etl, router
from .engines import DEFAULT_PARTITIONS, ENGINES, resolve_workers, run_pagerank
from .engines.local import DEFAULT_DAMPING, DEFAULT_MAX_ITERS, DEFAULT_TOL
from .errors import CorrectnessError, ValidationError
from .pipelines import (
    USER_TYPE,
    combined_connected_users,
    count_connected_users,
    multi_account_detection,
)

log = logging.getLogger("hybridgraph")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


@contextmanager
def stage(name: str, **fields):
    t0 = time.perf_counter()
    yield
    extra = "".join(f" {k}={v}" for k, v in fields.items())
    log.info("stage=%s wall_ms=%.3f%s", name, (time.perf_counter() - t0) * 1e3, extra)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _common(p: argparse.ArgumentParser, manifest: bool = True, engine: bool = True) -> None:
    p.add_argument("--out", required=True, type=Path, help="output file")
    p.add_argument("--workers", type=_positive, default=None, help="parallel-engine worker threads")
    if manifest:
        p.add_argument("--manifest", required=True, type=Path, help="snapshot manifest (path<TAB>identifier_type)")
        p.add_argument("--max-reject-fraction", type=float, default=etl.DEFAULT_MAX_REJECT_FRACTION)
        p.add_argument("--user-type", default=USER_TYPE)
    if engine:
        p.add_argument("--engine", choices=("auto",) + ENGINES, default="auto")
        p.add_argument("--router-config", type=Path, default=None)
        p.add_argument("--partitions", type=_positive, default=DEFAULT_PARTITIONS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridgraph", description="Hybrid graph analytics: two engines and a router.")
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="merge manifest snapshots into one edge file")
    _common(p, engine=False)

    p = sub.add_parser("components", help="combined connected users")
    _common(p)
    p.add_argument("--strategy", choices=("legacy", "unified"), default="unified")
    p.add_argument("--count-only", action="store_true")

    p = sub.add_parser("detect-accounts", help="multi-account detection (two-hop motif)")
    _common(p)
    p.add_argument("--cap", type=_positive, default=None, help="degree cap (max adjacent nodes)")
    p.add_argument("--via-types", type=_str_list, default=None, help="identifier types to match through (default: all)")

    p = sub.add_parser("pagerank")
    _common(p)
    p.add_argument("--damping", type=float, default=DEFAULT_DAMPING)
    p.add_argument("--iters", type=_positive, default=DEFAULT_MAX_ITERS)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("bench", help="synthetic benchmarks")
    bsub = p.add_subparsers(dest="bench_command", required=True, parser_class=_Parser)
    q = bsub.add_parser("sweep", help="time engines across scales")
    _common(q, manifest=False, engine=False)
    q.add_argument("--users", type=_int_list, default=[1000, 10000, 100000, 1000000])
    q.add_argument("--queries", type=_str_list, default=["components_full", "components_count"])
    q.add_argument("--engines", type=_str_list, default=list(ENGINES))
    q.add_argument("--repeats", type=_positive, default=3)
    q.add_argument("--seed", type=int, default=7)
    q.add_argument("--partitions", type=_positive, default=None)
    q.add_argument("--long-out", type=Path, default=None, help="plot-ready per-run CSV")

    q = bsub.add_parser("loss-curve", help="edges lost per degree cap")
    _common(q, manifest=False, engine=False)
    q.add_argument("--users", type=_positive, default=100000)
    q.add_argument("--identifiers", type=_positive, default=None)
    q.add_argument("--edges", type=int, default=None)
    q.add_argument("--skew", type=float, default=None)
    q.add_argument("--seed", type=int, default=7)
    q.add_argument("--caps", type=_int_list, default=[10, 100, 1000, 10000])

    q = bsub.add_parser("calibrate", help="router thresholds from a sweep report")
    _common(q, manifest=False, engine=False)
    q.add_argument("--report", required=True, type=Path)

    p = sub.add_parser("explain-route", help="show the router's decision")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--router-config", type=Path, default=None)
    p.add_argument("--manifest", type=Path, default=None, help="take vertex/edge counts from these snapshots")
    p.add_argument("--vertices", type=int, default=None)
    p.add_argument("--edges", type=int, default=0)
    p.add_argument("--query-kind", choices=router.QUERY_KINDS, default="components_full")
    p.add_argument("--output-rows", type=int, default=None)

    p = sub.add_parser("replay", help="re-run a command from its .run manifest")
    p.add_argument("run_manifest", type=Path)
    return parser


# run manifest


def _resolved(args: argparse.Namespace) -> dict[str, object]:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("log_level",):
            continue
        if isinstance(v, Path):
            v = str(v.resolve())
        elif isinstance(v, list):
            v = ",".join(str(x) for x in v)
        out[k] = "" if v is None else v
    return out


def _argv_for(args: argparse.Namespace) -> list[str]:
    """Fully explicit argv reproducing ``args``."""
    argv = [args.command] + ([args.bench_command] if args.command == "bench" else [])
    for k, v in sorted(vars(args).items()):
        if k in ("command", "bench_command", "log_level") or v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-")
        if v is True:
            argv.append(flag)
        elif isinstance(v, list):
            argv += [flag, ",".join(str(x) for x in v)]
        elif isinstance(v, Path):
            argv += [flag, str(v.resolve())]
        else:
            argv += [flag, str(v)]
    return argv


def write_run_manifest(args: argparse.Namespace) -> Path:
    path = Path(str(args.out) + ".run")
    values = {"subcommand": " ".join(_argv_for(args)[:2] if args.command == "bench" else [args.command])}
    values.update(_resolved(args))
    values["argv"] = json.dumps(_argv_for(args))
    etl.write_key_values(values, path)
    return path


# commands


def _router_config(args) -> router.RouterConfig:
    return router.RouterConfig.load(args.router_config) if args.router_config else router.RouterConfig()


def _snapshots(args):
    with stage("ingest", manifest=args.manifest):
        manifest = etl.read_manifest(args.manifest)
        return etl.load_snapshots(manifest, resolve_workers(args.workers), args.max_reject_fraction)


def _write_provenance(result, out: Path) -> None:
    etl.write_key_values(result.provenance(), Path(str(out) + ".provenance"))


def cmd_ingest(args) -> None:
    snapshots = _snapshots(args)
    with stage("merge"):
        graph = etl.merge_snapshots(snapshots)
    with stage("write", out=args.out):
        etl.write_edges(graph.edges, args.out)
    rejects = [(s.name, r) for s in snapshots for r in s.rejects]
    with Path(str(args.out) + ".rejects").open("w", encoding="utf-8", newline="\n") as fh:
        for name, r in rejects:
            fh.write(f"{name}\t{r.line_no}\t{r.reason}\n")
    etl.write_key_values(
        {
            "vertices": graph.vertex_count,
            "edges": graph.edge_count,
            "rejected_lines": len(rejects),
            **{f"snapshot.{name}": n for name, n in graph.sources},
        },
        Path(str(args.out) + ".provenance"),
    )


def cmd_components(args) -> None:
    snapshots = _snapshots(args)
    kwargs = dict(
        user_type=args.user_type, workers=args.workers, partitions=args.partitions, router_config=_router_config(args)
    )
    if args.count_only:
        with stage("components_count", strategy=args.strategy):
            result = count_connected_users(snapshots, args.strategy, args.engine, **kwargs)
        args.out.write_text(f"{result.payload}\n", encoding="utf-8")
    else:
        with stage("components", strategy=args.strategy):
            result = combined_connected_users(snapshots, args.strategy, args.engine, **kwargs)
        with stage("write", out=args.out):
            etl.persist_labeling(result.payload, args.out)
    log.info("engine=%s route=%s", result.engine, ",".join(result.route_reasons) or "explicit")
    _write_provenance(result, args.out)


def cmd_detect_accounts(args) -> None:
    snapshots = _snapshots(args)
    with stage("detect_accounts", cap=args.cap):
        result = multi_account_detection(
            snapshots,
            args.cap,
            args.engine,
            via_types=args.via_types,
            user_type=args.user_type,
            workers=args.workers,
            partitions=args.partitions,
            router_config=_router_config(args),
        )
    with stage("write", out=args.out):
        etl.persist_pairs(result.payload.pairs, args.out)
    _write_provenance(result, args.out)


def cmd_pagerank(args) -> None:
    snapshots = _snapshots(args)
    graph = etl.merge_snapshots(snapshots)
    engine = args.engine
    if engine == "auto":
        stats = router.GraphStats(graph.vertex_count, graph.edge_count, "pagerank", graph.vertex_count)
        engine = router.choose_engine(stats, _router_config(args)).engine
    with stage("pagerank", engine=engine):
        scores = run_pagerank(
            graph, engine, args.damping, args.iters, args.tol, workers=args.workers, partitions=args.partitions
        )
    with args.out.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("vertex,score\n")
        for v in sorted(scores):
            fh.write(f"{v},{scores[v]!r}\n")
    etl.write_key_values({"engine": engine, "vertices": graph.vertex_count}, Path(str(args.out) + ".provenance"))


def cmd_bench_sweep(args) -> None:
    specs = [bench.sweep_spec(n, args.seed) for n in args.users]
    with stage("sweep", scales=len(specs)):
        report = bench.run_sweep(
            specs,
            args.queries,
            args.engines,
            repeats=args.repeats,
            workers=args.workers,
            partitions=args.partitions,
            progress=log.info,
        )
    bench.write_report_csv(report, args.out)
    if args.long_out:
        bench.write_long_csv(report, args.long_out)
    etl.write_key_values(
        {
            "host": report.host,
            "crossover_scale": report.crossover_scale if report.crossover_scale is not None else "none",
            **{f"crossover.{q}": c for q, c in sorted(report.crossovers.items())},
        },
        Path(str(args.out) + ".provenance"),
    )


def cmd_bench_loss_curve(args) -> None:
    spec = bench.SyntheticSpec(args.users, args.identifiers, args.edges, args.skew, args.seed)
    with stage("loss_curve", caps=len(args.caps)):
        rows = bench.loss_curve(spec, args.caps)
    bench.write_loss_csv(rows, args.out)


def cmd_bench_calibrate(args) -> None:
    report = bench.read_report_csv(args.report)
    config = bench.calibrate_router(report)
    config.save(args.out)
    log.info("calibrated agreement=%.3f", bench.replay_agreement(report, config))


def cmd_explain_route(args) -> None:
    vertices, edges = args.vertices, args.edges
    if args.manifest is not None:
        graph = etl.merge_snapshots(etl.load_snapshots(etl.read_manifest(args.manifest)))
        vertices, edges = graph.vertex_count, graph.edge_count
    if vertices is None:
        raise ValidationError("give --vertices or --manifest")
    rows = args.output_rows
    if rows is None:
        rows = 1 if args.query_kind == "components_count" else vertices
    stats = router.GraphStats(vertices, edges, args.query_kind, rows)
    choice = router.choose_engine(stats, _router_config(args))
    args.out.write_text(router.explain(choice), encoding="utf-8")


COMMANDS = {
    "ingest": cmd_ingest,
    "components": cmd_components,
    "detect-accounts": cmd_detect_accounts,
    "pagerank": cmd_pagerank,
    ("bench", "sweep"): cmd_bench_sweep,
    ("bench", "loss-curve"): cmd_bench_loss_curve,
    ("bench", "calibrate"): cmd_bench_calibrate,
    "explain-route": cmd_explain_route,
}


def _resolve_defaults(key, args) -> None:
    """Fill every implicit default so the run manifest is complete."""
    if hasattr(args, "workers") and args.workers is None:
        args.workers = 4 if key == ("bench", "sweep") else resolve_workers(None)
    if key == ("bench", "sweep") and args.partitions is None:
        args.partitions = args.workers
    if key == ("bench", "loss-curve"):
        base = bench.loss_spec(args.users, args.seed)
        if args.identifiers is None:
            args.identifiers = base.n_identifiers
        if args.edges is None:
            args.edges = base.n_edges
        if args.skew is None:
            args.skew = base.degree_skew


def _dispatch(args) -> None:
    if args.command == "replay":
        values = etl.read_key_values(args.run_manifest)
        if "argv" not in values:
            raise ValidationError(f"{args.run_manifest}: no argv entry")
        argv = json.loads(values["argv"])
        return _dispatch(build_parser().parse_args(argv))
    key = (args.command, args.bench_command) if args.command == "bench" else args.command
    _resolve_defaults(key, args)
    write_run_manifest(args)
    COMMANDS[key](args)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        _dispatch(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except CorrectnessError as exc:
        log.error("correctness error: %s", exc)
        return EXIT_INTERNAL
    except ValueError as exc:
        log.error("validation error: %s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("i/o error: %s", exc)
        return EXIT_IO
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
