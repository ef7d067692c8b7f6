"""Redundant edges, resource-pooling decomposition and the pooling DAG.

An edge is redundant when it carries zero flow in every feasible assignment.
Removing all redundant edges splits the flexibility graph into connected
components, each of which pools completely on its own; the component count is
the effective resource pooling (ERP) number, and the per-component demand
indicators span the subspace the queue-length vector collapses onto in heavy
traffic.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    Assignment,
    ProblemInstance,
    _component_labels,
    _solved_network,
    find_feasible_point,
    make_instance,
)
from .errors import (
    EdgeNotPresent,
    Infeasible,
    InvariantViolation,
    NotAPartition,
    UnbalancedTotals,
)

__all__ = [
    "WorkCounter",
    "CrpComponent",
    "CrpDecomposition",
    "CrpDag",
    "SscBasis",
    "redundant_edges",
    "redundancy_oracle",
    "witness_point",
    "full_support_point",
    "crp_decomposition",
    "erp_number",
    "crp_condition",
    "crp_graph",
    "ssc_basis",
    "verify_decomposition",
]


@dataclass
class WorkCounter:
    """Counts elementary scan steps; lets tests pin the complexity bound."""

    ops: int = 0


def redundant_edges(
    inst: ProblemInstance,
    x: Assignment | None = None,
    order_seed: int = 0,
    counter: WorkCounter | None = None,
) -> frozenset[tuple[int, int]]:
    """Edges that are zero in every feasible assignment.

    Works from any single feasible point x: for each supply vertex, walk the
    graph alternating between positive-flow edges (supply to demand) and
    arbitrary instance edges (demand to supply).  Edges entering the reached
    supply set from outside the reached demand set can never carry flow.  The
    result does not depend on which feasible point seeds the walk.
    """
    if x is None:
        x = find_feasible_point(inst, order_seed=order_seed)
    m, n = inst.m, inst.n
    if counter is None:
        counter = WorkCounter()
    # positive-flow adjacency: supports supply -> demand steps
    flow_adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in x.support():
        flow_adj[j - 1].append(i)
    result: set[tuple[int, int]] = set()
    for lam in range(1, n + 1):
        seen_d = [False] * (m + 1)
        seen_s = [False] * (n + 1)
        counter.ops += m + n
        seen_s[lam] = True
        frontier = deque([lam])
        reached: list[int] = []
        while frontier:
            j = frontier.popleft()
            counter.ops += 1
            for i in flow_adj[j - 1]:
                counter.ops += 1
                if seen_d[i]:
                    continue
                seen_d[i] = True
                reached.append(i)
                for j2 in inst.demand_adj[i - 1]:
                    counter.ops += 1
                    if not seen_s[j2]:
                        seen_s[j2] = True
                        frontier.append(j2)
        if not reached:
            continue
        for j in range(1, n + 1):
            if not seen_s[j]:
                continue
            for i in inst.supply_adj[j - 1]:
                counter.ops += 1
                if not seen_d[i]:
                    result.add((i, j))
    return frozenset(result)


def redundancy_oracle(inst: ProblemInstance, edge: tuple[int, int]) -> bool:
    """True iff max{x_e : x feasible} = 0, decided directly on a max flow.

    Independent of the alternating-walk algorithm: the edge can carry flow
    iff it already does in the computed max flow, or the residual network
    contains a path from its supply back to its demand (an augmenting cycle
    through the edge).
    """
    edge = (int(edge[0]), int(edge[1]))
    if edge not in inst.edges:
        raise EdgeNotPresent(f"edge {edge} not in instance")
    net, ok = _solved_network(inst)
    if not ok:
        raise Infeasible("no feasible assignment")
    i, j = edge
    arc = net.edge_arc[edge]
    if net.arc_flow[arc] > 0:
        return False
    return net.residual_parents(inst.m + j)[i] == -1


def witness_point(inst: ProblemInstance, edge: tuple[int, int]) -> Assignment | None:
    """A feasible assignment with the given edge strictly positive, if any."""
    edge = (int(edge[0]), int(edge[1]))
    if edge not in inst.edges:
        raise EdgeNotPresent(f"edge {edge} not in instance")
    net, ok = _solved_network(inst)
    if not ok:
        raise Infeasible("no feasible assignment")
    return net.force_edge_positive(*edge)


def full_support_point(inst: ProblemInstance) -> Assignment:
    """A feasible point whose support is exactly the non-redundant edges.

    Average of one witness per non-redundant edge; convexity keeps the mean
    feasible and every witnessed edge positive in it.
    """
    net, ok = _solved_network(inst)
    if not ok:
        raise Infeasible("no feasible assignment")
    witnesses = []
    for edge in inst.sorted_edges:
        w = net.force_edge_positive(*edge)
        if w is not None:
            witnesses.append(w)
    if not witnesses:
        return Assignment(inst.m, inst.n, {})
    k = len(witnesses)
    acc: dict[tuple[int, int], Fraction] = {}
    for w in witnesses:
        for e, v in w.entries.items():
            acc[e] = acc.get(e, Fraction(0)) + v
    return Assignment(inst.m, inst.n, {e: v / k for e, v in acc.items()})


@dataclass(frozen=True)
class CrpComponent:
    """One pooling block: its demands, supplies and internal edges."""

    demands: tuple[int, ...]
    supplies: tuple[int, ...]
    edges: frozenset[tuple[int, int]]


@dataclass(frozen=True)
class CrpDecomposition:
    """Components of the graph after dropping redundant edges."""

    m: int
    n: int
    redundant_edges: frozenset[tuple[int, int]]
    components: tuple[CrpComponent, ...]

    @property
    def erp_number(self) -> int:
        return len(self.components)

    def component_of_demand(self, i: int) -> int:
        """1-based component label containing demand i."""
        for l, comp in enumerate(self.components, start=1):
            if i in comp.demands:
                return l
        raise KeyError(i)

    def component_of_supply(self, j: int) -> int:
        for l, comp in enumerate(self.components, start=1):
            if j in comp.supplies:
                return l
        raise KeyError(j)

    def to_dict(self) -> dict:
        return {
            "erp_number": self.erp_number,
            "redundant_edges": [list(e) for e in sorted(self.redundant_edges)],
            "components": [
                {
                    "demands": list(c.demands),
                    "supplies": list(c.supplies),
                    "edges": [list(e) for e in sorted(c.edges)],
                }
                for c in self.components
            ],
        }


def crp_decomposition(
    inst: ProblemInstance, order_seed: int = 0
) -> CrpDecomposition:
    """Connected components after removing every redundant edge.

    Components are ordered by their lowest vertex, demands and supplies
    interleaved (demand i sits at position 2i-1, supply j at 2j), so the
    numbering is stable and matches the usual drawing order.
    """
    er = redundant_edges(inst, order_seed=order_seed)
    kept = inst.edges - er
    d_labels, s_labels = _component_labels(inst.m, inst.n, kept)
    groups: dict[int, dict] = {}
    for i in range(1, inst.m + 1):
        g = groups.setdefault(d_labels[i - 1], {"d": [], "s": []})
        g["d"].append(i)
    for j in range(1, inst.n + 1):
        g = groups.setdefault(s_labels[j - 1], {"d": [], "s": []})
        g["s"].append(j)

    def lowest_vertex(g: dict) -> int:
        cands = [2 * i - 1 for i in g["d"]] + [2 * j for j in g["s"]]
        return min(cands)

    ordered = sorted(groups.values(), key=lowest_vertex)
    comps = []
    for g in ordered:
        dset = set(g["d"])
        comp_edges = frozenset(e for e in kept if e[0] in dset)
        comps.append(CrpComponent(tuple(g["d"]), tuple(g["s"]), comp_edges))
    return CrpDecomposition(inst.m, inst.n, er, tuple(comps))


def erp_number(inst: ProblemInstance, order_seed: int = 0) -> int:
    return crp_decomposition(inst, order_seed=order_seed).erp_number


def crp_condition(inst: ProblemInstance) -> bool:
    """Complete pooling: connected flexibility graph and no redundant edge."""
    er = redundant_edges(inst)
    if er:
        return False
    d_labels, s_labels = _component_labels(inst.m, inst.n, inst.edges)
    return max(d_labels + s_labels) == 0


@dataclass(frozen=True)
class CrpDag:
    """Directed multigraph on component labels induced by redundant edges.

    Edge l1 -> l2 with multiplicity k means k redundant edges run from
    demands of component l1 to supplies of component l2.  Always acyclic.
    """

    d: int
    edges: Mapping[tuple[int, int], int]

    def _adj(self, reverse: bool = False) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.d + 1)]
        for (a, b) in self.edges:
            if reverse:
                adj[b].append(a)
            else:
                adj[a].append(b)
        return adj

    def _reach(self, start: int, reverse: bool) -> frozenset[int]:
        adj = self._adj(reverse)
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return frozenset(seen)

    def descendants(self, l: int) -> frozenset[int]:
        """Labels reachable from l, l itself included."""
        return self._reach(l, reverse=False)

    def ancestors(self, l: int) -> frozenset[int]:
        """Labels that reach l, l itself included."""
        return self._reach(l, reverse=True)

    @property
    def edge_multiplicity_total(self) -> int:
        return sum(self.edges.values())

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "edges": [[a, b, k] for (a, b), k in sorted(self.edges.items())],
        }


def crp_graph(decomp: CrpDecomposition, inst: ProblemInstance) -> CrpDag:
    """Collapse redundant edges onto component labels and check acyclicity."""
    label_d = {}
    label_s = {}
    for l, comp in enumerate(decomp.components, start=1):
        for i in comp.demands:
            label_d[i] = l
        for j in comp.supplies:
            label_s[j] = l
    multi: Counter = Counter()
    for i, j in decomp.redundant_edges:
        multi[(label_d[i], label_s[j])] += 1
    # Kahn's algorithm; a cycle here means the decomposition itself is broken
    indeg = [0] * (decomp.erp_number + 1)
    adj: list[list[int]] = [[] for _ in range(decomp.erp_number + 1)]
    for (a, b) in multi:
        adj[a].append(b)
        indeg[b] += 1
    queue = deque(l for l in range(1, decomp.erp_number + 1) if indeg[l] == 0)
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for v in adj[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if seen != decomp.erp_number:
        raise InvariantViolation("pooling graph contains a directed cycle")
    if inst.m != decomp.m or inst.n != decomp.n:
        raise InvariantViolation("decomposition does not match instance shape")
    return CrpDag(decomp.erp_number, dict(multi))


@dataclass(frozen=True)
class SscBasis:
    """Indicator vectors of the demand blocks; orthogonal basis of the
    collapse subspace."""

    vectors: tuple[tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.vectors)


def ssc_basis(decomp: CrpDecomposition) -> SscBasis:
    vectors = []
    for comp in decomp.components:
        dset = set(comp.demands)
        vectors.append(tuple(1 if i in dset else 0 for i in range(1, decomp.m + 1)))
    return SscBasis(tuple(vectors))


def _sub_instance(
    inst: ProblemInstance, demands: Sequence[int], supplies: Sequence[int]
) -> ProblemInstance:
    di = sorted(demands)
    sj = sorted(supplies)
    dmap = {i: k for k, i in enumerate(di, start=1)}
    smap = {j: k for k, j in enumerate(sj, start=1)}
    edges = [
        (dmap[i], smap[j])
        for (i, j) in inst.sorted_edges
        if i in dmap and j in smap
    ]
    return make_instance(
        [inst.demand[i - 1] for i in di],
        [inst.supply[j - 1] for j in sj],
        edges,
    )


def verify_decomposition(inst: ProblemInstance, cover: Sequence) -> bool:
    """Check a candidate ordered demand cover against the sequential rule.

    Supplies are assigned greedily: each block takes every neighbor of its
    demands not claimed earlier.  The cover is a valid pooling decomposition
    iff every induced block is balanced, feasible, connected, and free of
    redundant edges, and together the blocks use up all supplies.
    """
    parts = [frozenset(int(i) for i in part) for part in cover]
    seen: set[int] = set()
    for part in parts:
        if not part:
            raise NotAPartition("empty demand block")
        for i in part:
            if not 1 <= i <= inst.m:
                raise NotAPartition(f"demand {i} out of range")
            if i in seen:
                raise NotAPartition(f"demand {i} appears in two blocks")
        seen |= part
    if seen != set(range(1, inst.m + 1)):
        missing = sorted(set(range(1, inst.m + 1)) - seen)
        raise NotAPartition(f"cover misses demands {missing}")
    used: set[int] = set()
    for part in parts:
        block_supplies = set()
        for i in part:
            block_supplies.update(inst.demand_adj[i - 1])
        block_supplies -= used
        if not block_supplies:
            return False
        try:
            sub = _sub_instance(inst, sorted(part), sorted(block_supplies))
            if not crp_condition(sub):
                return False
        except (UnbalancedTotals, Infeasible):
            return False
        used |= block_supplies
    return used == set(range(1, inst.n + 1))
