"""Edges lost to the per-vertex neighbor cap on a skewed synthetic graph.

    python3 scripts/loss_table.py --users 100000 --caps 10,100,1000,10000
"""

from __future__ import annotations

import argparse
from pathlib import Path

from hybridgraph import bench


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--users", type=int, default=100_000)
    ap.add_argument("--caps", default="10,100,1000,10000")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", type=Path, default=Path("results/loss.csv"))
    args = ap.parse_args()

    spec = bench.loss_spec(args.users, args.seed)
    caps = [int(c) for c in args.caps.split(",")]
    rows = bench.loss_curve(spec, caps)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    bench.write_loss_csv(rows, args.out)

    graph = bench.synthetic_graph(spec)
    print(f"{graph.edge_count} edges, max degree {bench.max_degree(graph)}")
    print(f"{'cap':>8}{'edges kept':>14}{'lost':>9}")
    for r in rows:
        print(f"{r.cap:>8}{r.edges_after:>14}{100 * r.lost_percentage:>8.1f}%")


if __name__ == "__main__":
    main()
