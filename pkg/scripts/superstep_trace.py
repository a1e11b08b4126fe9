"""Per-superstep message and label-change counts for min-label propagation.

    python3 scripts/superstep_trace.py --users 100000 --partitions 8
"""

from __future__ import annotations

import argparse

from hybridgraph import bench
from hybridgraph.engines import connected_components_parallel, partition


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--users", type=int, default=100_000)
    ap.add_argument("--partitions", type=int, default=8)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    graph = bench.synthetic_graph(bench.sweep_spec(args.users))
    stats = []
    lab = connected_components_parallel(partition(graph, args.partitions), args.workers, stats=stats)
    print(f"{graph.vertex_count} vertices, {graph.edge_count} edges, {lab.component_count} components")
    print(f"{'step':>5}{'messages':>12}{'changed':>10}{'ms':>9}")
    for s in stats:
        print(f"{s.superstep:>5}{s.messages:>12}{s.changed:>10}{s.wall_ms:>9.2f}")


if __name__ == "__main__":
    main()
