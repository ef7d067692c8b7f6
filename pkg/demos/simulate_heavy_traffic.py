#!/usr/bin/env python3
"""Drive MaxWeight queues toward heavy traffic and watch the limits bite.

Each block of the flexibility graph behaves like one pooled queue as the
load approaches capacity: the scaled total backlog approaches a constant
set by the arrival variances, and the queue vector collapses onto the
block indicator directions.  Horizons here are kept small so the script
runs in seconds; the test suite pushes the same checks much harder.
"""

from procflex import (
    design_flexibility,
    heavy_traffic_check,
    make_instance,
    simulate,
)

one = make_instance([1], [1], [(1, 1)])
print("single queue, arrivals 0 or 3, service rate 1:")
report = heavy_traffic_check(
    one, ["0.2", "0.1", "0.05"], horizon=500_000, seed=7, replications=3,
    arrival_levels=[3],
)
print(f"  limit constant {report.rhs}")
for row in report.rows:
    print(f"  eps {str(row.eps):>4}: scaled backlog {row.lhs:.3f}"
          f"  (ratio {row.ratio:.3f})")
print("  the ratio closes in on 1 as eps shrinks")

four = make_instance(
    [1, 1, 1, 1],
    [1, 1, 1, 1],
    [(1, 1), (1, 2), (2, 2), (3, 3), (4, 4), (3, 4), (1, 4)],
)
print("\nfour nominal pairs joined by redundant edges (four blocks):")
report = heavy_traffic_check(
    four, ["0.1", "0.05"], horizon=200_000, seed=7, replications=3
)
print(f"  blocks {[list(c) for c in report.components]}, limit {report.rhs}")
for row in report.rows:
    print(f"  eps {str(row.eps):>4}: ratio {row.ratio:.3f},"
          f" queue means {[round(q, 1) for q in row.queue_means]}")
print("  the servers do lend a hand moment to moment, but the limit is")
print("  the trimmed system's: four separate queues")

chain = design_flexibility([1] * 4, [1] * 4, 1).instance()
print("\nminimum-edge fully pooled graph on the same rates:")
report = heavy_traffic_check(
    chain, ["0.1", "0.05"], horizon=200_000, seed=7, replications=3
)
for row in report.rows:
    print(f"  eps {str(row.eps):>4}: ratio {row.ratio:.3f},"
          f" collapse ratio {row.ssc:.3f}")
print("  one block pools all four queues; the collapse ratio falls with eps")

diag = make_instance([1] * 4, [1] * 4, [(i, i) for i in range(1, 5)])
pooled = simulate(chain, "0.05", horizon=200_000, seed=7, replications=3)
split = simulate(diag, "0.05", horizon=200_000, seed=7, replications=3)
factor = sum(split.queue_means) / sum(pooled.queue_means)
print(f"\nsame load, no sharing at all: total backlog grows by x{factor:.1f}")
