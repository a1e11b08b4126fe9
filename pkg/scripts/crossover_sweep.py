"""Time both engines on synthetic combined-connected-users workloads.

Writes the median report, the per-run long table, and a router config
calibrated from the measurements, then prints a winner table.

    python3 scripts/crossover_sweep.py --users 1000,10000,100000,1000000 --out results/
"""

from __future__ import annotations

import argparse
from pathlib import Path

from hybridgraph import bench


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--users", default="1000,10000,100000,1000000")
    ap.add_argument("--queries", default="components_full,components_count")
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    specs = [bench.sweep_spec(int(n), args.seed) for n in args.users.split(",")]
    queries = args.queries.split(",")
    report = bench.run_sweep(specs, queries, workers=args.workers, repeats=args.repeats, progress=print)
    bench.write_report_csv(report, args.out / "sweep.csv")
    bench.write_long_csv(report, args.out / "sweep_long.csv")

    print(f"{'query':<18}{'vertices':>10}{'local ms':>12}{'parallel ms':>14}  winner")
    for q in queries:
        for scale, winner in report.winners(q).items():
            lo = report.row(q, scale, "local").median_ms
            pa = report.row(q, scale, "parallel").median_ms
            print(f"{q:<18}{scale:>10}{lo:>12.2f}{pa:>14.2f}  {winner}")
    print("crossovers:", report.crossovers or "none")

    try:
        config = bench.calibrate_router(report)
    except ValueError as exc:
        print("calibration skipped:", exc)
        return
    config.save(args.out / "router.conf")
    print(f"router.conf written, agreement {bench.replay_agreement(report, config):.0%}")


if __name__ == "__main__":
    main()
