#!/usr/bin/env python3
"""Plan flexibility upgrades one edge at a time.

Adding an edge merges every block on the new directed cycle it closes in
the block DAG, so the best single addition is a longest-path computation,
not a search over assignments.  Over a longer horizon the best plans are
structured: run a chain of blocks, then close it at carefully chosen
steps.  Greedy merging is visibly suboptimal.
"""

from procflex import (
    add_edge_effect,
    best_single_edge,
    crp_decomposition,
    greedy_vs_optimal_report,
    make_instance,
    plan_schedule,
)

inst = make_instance(
    demand=[1, 1, 2, 2, 1],
    supply=[2, 1, 1, 1, 2],
    edges=[
        (1, 2), (1, 3), (1, 5), (2, 1), (2, 4),
        (3, 1), (3, 3), (4, 4), (4, 5), (5, 5),
    ],
)
print(f"start: {crp_decomposition(inst).erp_number} blocks")

edge, effect = best_single_edge(inst)
print(f"best single edge {edge}: merges blocks {sorted(effect.cycle_vertices)}"
      f" -> {effect.new_erp} blocks (delta {effect.delta})")

# a reversed redundant edge closes a cycle; a parallel one changes nothing
for probe in ((4, 2), (5, 1), (2, 2)):
    eff = add_edge_effect(inst, probe)
    print(f"  adding {probe}: dag edge {eff.dag_edge}, new block count {eff.new_erp}")

print("\nnine isolated blocks, budget eleven, minimize the running sum:")
report = plan_schedule(9, 11, "sum")
print(f"  close the chain at steps {list(report.schedule.cycle_steps)}")
print(f"  block trajectory {list(report.trajectory)}")
print(f"  objective value {report.value}")
if report.closed_form is not None:
    cf = report.closed_form
    verdict = "ties" if cf.matches_dp else "misses"
    print(f"  direct formula: p={cf.p} closes at {list(cf.k)}, value {cf.value};"
          f" it {verdict} the dynamic program")

print("\ngreedy vs optimal on four pairs tied by redundant edges"
      " (two additions, final block count):")
four = make_instance(
    [1, 1, 1, 1],
    [1, 1, 1, 1],
    [(1, 1), (1, 2), (2, 2), (3, 3), (4, 4), (3, 4), (1, 4)],
)
duel = greedy_vs_optimal_report(four, 2, "final")
print(f"  greedy picks {list(duel.greedy_edges)}: trajectory"
      f" {list(duel.greedy_trajectory)}")
print(f"  optimal picks {list(duel.optimal_edges)}: trajectory"
      f" {list(duel.optimal_trajectory)}")
print("  greedy grabs the big merge first and strands a block;"
      " waiting pools everything")
