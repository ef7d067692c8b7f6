"""Exact-arithmetic transportation-polytope instances.

A problem instance is a triple (demand, supply, edges) describing the polytope
of nonnegative matrices x with row sums ``demand``, column sums ``supply`` and
support restricted to ``edges``.  Everything in this module (and in the other
combinatorial modules) works with :class:`fractions.Fraction`; feasibility,
redundancy and extremality are exact-zero properties, so no floating point is
allowed anywhere near them.

Vertices are 1-indexed.  Demand indices live in [1, m], supply indices in
[1, n]; the two index spaces are distinct (an edge is a (demand, supply) pair).
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DuplicateEdge,
    EdgeOutOfRange,
    Infeasible,
    NegativeRate,
    NotFeasiblePoint,
    SizeLimitExceeded,
    UnbalancedTotals,
    ZeroVector,
)

__all__ = [
    "ProblemInstance",
    "Assignment",
    "SupportGraph",
    "parse_rational",
    "format_rational",
    "validate_instance",
    "make_instance",
    "is_feasible",
    "hall_feasible",
    "find_feasible_point",
    "greedy_extreme_point",
    "support_graph",
    "is_extreme_point",
    "gcd_combined",
]


def parse_rational(value) -> Fraction:
    """Parse an exact rational from an int or a "p/q" / "p" string.

    Floats are rejected: the file format is exact by design.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Canonical string form: "3", "-1/2", ... round-trips through parse."""
    return str(Fraction(value))


@dataclass(frozen=True)
class ProblemInstance:
    """Validated (demand, supply, edges) triple with equal totals."""

    m: int
    n: int
    demand: tuple[Fraction, ...]
    supply: tuple[Fraction, ...]
    edges: frozenset[tuple[int, int]]

    @cached_property
    def total(self) -> Fraction:
        return sum(self.demand, Fraction(0))

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def demand_adj(self) -> tuple[tuple[int, ...], ...]:
        """demand_adj[i-1] = sorted supply neighbors of demand i."""
        adj: list[list[int]] = [[] for _ in range(self.m)]
        for i, j in self.sorted_edges:
            adj[i - 1].append(j)
        return tuple(tuple(a) for a in adj)

    @cached_property
    def supply_adj(self) -> tuple[tuple[int, ...], ...]:
        """supply_adj[j-1] = sorted demand neighbors of supply j."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.sorted_edges:
            adj[j - 1].append(i)
        return tuple(tuple(a) for a in adj)

    def restricted(self, edges: Iterable[tuple[int, int]]) -> "ProblemInstance":
        """Same rates, edge set replaced by a subset of the current one."""
        sub = frozenset(edges)
        unknown = sub - self.edges
        if unknown:
            raise EdgeOutOfRange(f"edges not in instance: {sorted(unknown)}")
        return ProblemInstance(self.m, self.n, self.demand, self.supply, sub)

    def with_edge(self, edge: tuple[int, int]) -> "ProblemInstance":
        i, j = edge
        if not (1 <= i <= self.m and 1 <= j <= self.n):
            raise EdgeOutOfRange(f"edge {edge} outside [1,{self.m}]x[1,{self.n}]")
        return ProblemInstance(
            self.m, self.n, self.demand, self.supply, self.edges | {(i, j)}
        )

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "demand": [format_rational(v) for v in self.demand],
            "supply": [format_rational(v) for v in self.supply],
            "edges": [list(e) for e in self.sorted_edges],
        }


def validate_instance(raw: Mapping) -> ProblemInstance:
    """Build a validated instance from decoded file data.

    Expects keys m, n, demand, supply, edges; rationals may be integers or
    exact strings like "3/2".  Raises the structured domain errors for rate
    and edge problems, ValueError for malformed documents.
    """
    try:
        m = raw["m"]
        n = raw["n"]
        demand_raw = raw["demand"]
        supply_raw = raw["supply"]
        edges_raw = raw["edges"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"instance document missing field: {exc}") from exc
    if not isinstance(m, int) or not isinstance(n, int) or m < 1 or n < 1:
        raise ValueError("m and n must be positive integers")
    if len(demand_raw) != m:
        raise ValueError(f"demand has {len(demand_raw)} entries, expected m={m}")
    if len(supply_raw) != n:
        raise ValueError(f"supply has {len(supply_raw)} entries, expected n={n}")
    demand = tuple(parse_rational(v) for v in demand_raw)
    supply = tuple(parse_rational(v) for v in supply_raw)
    return make_instance(demand, supply, [tuple(e) for e in edges_raw], m=m, n=n)


def make_instance(
    demand: Sequence,
    supply: Sequence,
    edges: Iterable[tuple[int, int]],
    m: int | None = None,
    n: int | None = None,
) -> ProblemInstance:
    """Validate and build an instance from in-memory values."""
    demand_f = tuple(parse_rational(v) for v in demand)
    supply_f = tuple(parse_rational(v) for v in supply)
    m = len(demand_f) if m is None else m
    n = len(supply_f) if n is None else n
    for k, v in enumerate(demand_f, start=1):
        if v < 0:
            raise NegativeRate(f"demand {k} is negative: {v}")
    for k, v in enumerate(supply_f, start=1):
        if v < 0:
            raise NegativeRate(f"supply {k} is negative: {v}")
    edge_list = []
    for e in edges:
        if len(e) != 2:
            raise ValueError(f"bad edge entry: {e!r}")
        edge_list.append((int(e[0]), int(e[1])))
    seen = set()
    for e in edge_list:
        i, j = e
        if not (1 <= i <= m and 1 <= j <= n):
            raise EdgeOutOfRange(f"edge {e} outside [1,{m}]x[1,{n}]")
        if e in seen:
            raise DuplicateEdge(f"edge {e} listed twice")
        seen.add(e)
    if sum(demand_f, Fraction(0)) != sum(supply_f, Fraction(0)):
        raise UnbalancedTotals(
            f"total demand {sum(demand_f, Fraction(0))} != "
            f"total supply {sum(supply_f, Fraction(0))}"
        )
    return ProblemInstance(m, n, demand_f, supply_f, frozenset(edge_list))


@dataclass(frozen=True)
class Assignment:
    """Sparse feasible point: only strictly positive entries are stored."""

    m: int
    n: int
    entries: Mapping[tuple[int, int], Fraction]

    def __post_init__(self):
        object.__setattr__(
            self,
            "entries",
            {e: Fraction(v) for e, v in self.entries.items() if v != 0},
        )

    def value(self, i: int, j: int) -> Fraction:
        return self.entries.get((i, j), Fraction(0))

    def row_sums(self) -> tuple[Fraction, ...]:
        sums = [Fraction(0)] * self.m
        for (i, _j), v in self.entries.items():
            sums[i - 1] += v
        return tuple(sums)

    def col_sums(self) -> tuple[Fraction, ...]:
        sums = [Fraction(0)] * self.n
        for (_i, j), v in self.entries.items():
            sums[j - 1] += v
        return tuple(sums)

    def support(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.entries)

    def to_triples(self) -> list[list]:
        return [
            [i, j, format_rational(v)] for (i, j), v in sorted(self.entries.items())
        ]

    @staticmethod
    def from_triples(m: int, n: int, triples: Iterable) -> "Assignment":
        entries = {}
        for t in triples:
            i, j, v = int(t[0]), int(t[1]), parse_rational(t[2])
            entries[(i, j)] = v
        return Assignment(m, n, entries)


def check_assignment(inst: ProblemInstance, x: Assignment) -> None:
    """Raise NotFeasiblePoint unless x lies in the instance's polytope."""
    if x.m != inst.m or x.n != inst.n:
        raise NotFeasiblePoint("assignment shape does not match instance")
    stray = x.support() - inst.edges
    if stray:
        raise NotFeasiblePoint(f"support outside edge set: {sorted(stray)}")
    for v in x.entries.values():
        if v < 0:
            raise NotFeasiblePoint("negative entry")
    if x.row_sums() != inst.demand:
        raise NotFeasiblePoint("row sums do not match demand")
    if x.col_sums() != inst.supply:
        raise NotFeasiblePoint("column sums do not match supply")


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class SupportGraph:
    """Support of an assignment plus connected-component labels.

    Labels are 0-based, assigned in order of first appearance while scanning
    demand vertices 1..m then supply vertices 1..n; isolated vertices get
    their own component.
    """

    edges: frozenset[tuple[int, int]]
    demand_labels: tuple[int, ...]
    supply_labels: tuple[int, ...]

    @property
    def n_components(self) -> int:
        top = -1
        for l in self.demand_labels + self.supply_labels:
            top = max(top, l)
        return top + 1

    def is_forest(self) -> bool:
        vertices = len(self.demand_labels) + len(self.supply_labels)
        return len(self.edges) == vertices - self.n_components


def _component_labels(
    m: int, n: int, edges: Iterable[tuple[int, int]]
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # vertices 0..m-1 demands, m..m+n-1 supplies
    uf = _UnionFind(m + n)
    for i, j in edges:
        uf.union(i - 1, m + j - 1)
    labels: dict[int, int] = {}
    out = []
    for v in range(m + n):
        root = uf.find(v)
        if root not in labels:
            labels[root] = len(labels)
        out.append(labels[root])
    return tuple(out[:m]), tuple(out[m:])


def support_graph(x: Assignment) -> SupportGraph:
    """Edges carrying strictly positive flow, with component labels."""
    edges = x.support()
    d_labels, s_labels = _component_labels(x.m, x.n, edges)
    return SupportGraph(edges, d_labels, s_labels)


def is_extreme_point(inst: ProblemInstance, x: Assignment) -> bool:
    """True iff x is a vertex of the polytope, i.e. its support is a forest."""
    check_assignment(inst, x)
    return support_graph(x).is_forest()


def gcd_combined(demand: Sequence, supply: Sequence) -> Fraction:
    """Largest rational c such that every rate is an integer multiple of c."""
    values = [parse_rational(v) for v in demand] + [parse_rational(v) for v in supply]
    if not values:
        raise ZeroVector("empty rate vectors")
    for v in values:
        if v <= 0:
            raise ZeroVector(f"rates must be strictly positive, got {v}")
    lcm_den = 1
    for v in values:
        lcm_den = lcm_den * v.denominator // math.gcd(lcm_den, v.denominator)
    ints = [int(v * lcm_den) for v in values]
    g = 0
    for k in ints:
        g = math.gcd(g, k)
    return Fraction(g, lcm_den)


# ---------------------------------------------------------------------------
# Exact max-flow.
#
# Node layout: 0 = source, 1..m = demands, m+1..m+n = supplies, m+n+1 = sink.
# Arc (demand i -> supply j) carries x_ij.  Capacities are Fractions; the
# "infinite" capacity on instance edges is total+1, which no feasible flow can
# reach.  Edmonds-Karp keeps the arithmetic exact and the run deterministic;
# order_seed permutes the adjacency construction so tests can seed the
# decomposition with genuinely different feasible points.
# ---------------------------------------------------------------------------


class _Network:
    def __init__(self, inst: ProblemInstance, order_seed: int = 0):
        self.inst = inst
        m, n = inst.m, inst.n
        self.source = 0
        self.sink = m + n + 1
        self.n_nodes = m + n + 2
        self.arc_to: list[int] = []
        self.arc_cap: list[Fraction] = []
        self.arc_flow: list[Fraction] = []
        self.adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        self.edge_arc: dict[tuple[int, int], int] = {}
        inf = inst.total + 1
        for i in range(1, m + 1):
            self._add(0, i, inst.demand[i - 1])
        edge_order = list(inst.sorted_edges)
        if order_seed:
            random.Random(order_seed).shuffle(edge_order)
        for i, j in edge_order:
            self.edge_arc[(i, j)] = self._add(i, m + j, inf)
        for j in range(1, n + 1):
            self._add(m + j, self.sink, inst.supply[j - 1])

    def _add(self, u: int, v: int, cap: Fraction) -> int:
        a = len(self.arc_to)
        self.arc_to.extend((v, u))
        self.arc_cap.extend((Fraction(cap), Fraction(0)))
        self.arc_flow.extend((Fraction(0), Fraction(0)))
        self.adj[u].append(a)
        self.adj[v].append(a ^ 1)
        return a

    def residual(self, a: int) -> Fraction:
        return self.arc_cap[a] - self.arc_flow[a]

    def max_flow(self) -> Fraction:
        total = Fraction(0)
        while True:
            parent_arc = [-1] * self.n_nodes
            parent_arc[self.source] = -2
            queue = deque([self.source])
            while queue:
                u = queue.popleft()
                if u == self.sink:
                    break
                for a in self.adj[u]:
                    v = self.arc_to[a]
                    if parent_arc[v] == -1 and self.residual(a) > 0:
                        parent_arc[v] = a
                        queue.append(v)
            if parent_arc[self.sink] == -1:
                return total
            bottleneck = None
            v = self.sink
            while v != self.source:
                a = parent_arc[v]
                r = self.residual(a)
                bottleneck = r if bottleneck is None else min(bottleneck, r)
                v = self.arc_to[a ^ 1]
            v = self.sink
            while v != self.source:
                a = parent_arc[v]
                self.arc_flow[a] += bottleneck
                self.arc_flow[a ^ 1] -= bottleneck
                v = self.arc_to[a ^ 1]
            total += bottleneck

    def assignment(self) -> Assignment:
        entries = {}
        for (i, j), a in self.edge_arc.items():
            if self.arc_flow[a] > 0:
                entries[(i, j)] = self.arc_flow[a]
        return Assignment(self.inst.m, self.inst.n, entries)

    def residual_parents(self, start: int) -> list[int]:
        """BFS over residual arcs; returns parent-arc array (-1 unreached)."""
        parent_arc = [-1] * self.n_nodes
        parent_arc[start] = -2
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for a in self.adj[u]:
                v = self.arc_to[a]
                if parent_arc[v] == -1 and self.residual(a) > 0:
                    parent_arc[v] = a
                    queue.append(v)
        return parent_arc

    def force_edge_positive(self, i: int, j: int) -> Assignment | None:
        """Assignment with x_ij > 0 consistent with a max flow, or None.

        Pushes half the bottleneck of a residual cycle through (i, j); using
        half keeps every previously positive arc positive, which the witness
        construction for the decomposition relies on.
        """
        a = self.edge_arc[(i, j)]
        if self.arc_flow[a] > 0:
            return self.assignment()
        m = self.inst.m
        parent = self.residual_parents(m + j)
        if parent[i] == -1:
            return None
        # collect residual path j -> i, then close the cycle with arc i -> j
        path = []
        v = i
        while v != m + j:
            pa = parent[v]
            path.append(pa)
            v = self.arc_to[pa ^ 1]
        theta = self.residual(a)
        for pa in path:
            theta = min(theta, self.residual(pa))
        theta = theta / 2
        saved = list(self.arc_flow)
        for pa in path:
            self.arc_flow[pa] += theta
            self.arc_flow[pa ^ 1] -= theta
        self.arc_flow[a] += theta
        self.arc_flow[a ^ 1] -= theta
        out = self.assignment()
        self.arc_flow = saved
        return out


def _solved_network(inst: ProblemInstance, order_seed: int = 0) -> tuple[_Network, bool]:
    net = _Network(inst, order_seed=order_seed)
    value = net.max_flow()
    return net, value == inst.total


def is_feasible(inst: ProblemInstance) -> bool:
    """True iff the polytope is non-empty (all demand routable)."""
    _net, ok = _solved_network(inst)
    return ok


def hall_feasible(inst: ProblemInstance, limit: int = 20) -> bool:
    """Exhaustive capacity-region check; independent oracle for is_feasible.

    Every demand subset must have neighborhood supply at least its demand.
    Exponential in m, so guarded by `limit`.
    """
    if inst.m > limit:
        raise SizeLimitExceeded(f"m={inst.m} exceeds exhaustive limit {limit}")
    if inst.total != sum(inst.supply, Fraction(0)):
        return False
    nbr_mask = []
    for i in range(inst.m):
        mask = 0
        for j in inst.demand_adj[i]:
            mask |= 1 << (j - 1)
        nbr_mask.append(mask)
    for sub in range(1, 1 << inst.m):
        dsum = Fraction(0)
        mask = 0
        s = sub
        while s:
            b = (s & -s).bit_length() - 1
            dsum += inst.demand[b]
            mask |= nbr_mask[b]
            s &= s - 1
        ssum = Fraction(0)
        t = mask
        while t:
            b = (t & -t).bit_length() - 1
            ssum += inst.supply[b]
            t &= t - 1
        if dsum > ssum:
            return False
    return True


def find_feasible_point(inst: ProblemInstance, order_seed: int = 0) -> Assignment:
    """Any point of the polytope, extracted from an exact max flow."""
    net, ok = _solved_network(inst, order_seed=order_seed)
    if not ok:
        raise Infeasible("no feasible assignment: capacity region violated")
    return net.assignment()


def greedy_extreme_point(
    demand: Sequence,
    supply: Sequence,
    order: Iterable[tuple[int, int]] | str | None = None,
) -> Assignment:
    """Extreme point of the complete-bipartite polytope by greedy saturation.

    Repeatedly picks an active (demand, supply) pair, routes the largest
    possible amount, and retires whichever side is exhausted; on a tie both
    sides retire, which is exactly what produces degenerate extreme points
    with several components.  `order` is either "first-available" (default:
    lexicographically smallest active pair) or an explicit sequence of pairs.

    All extreme points arise this way for some order, and with integer rates
    every entry is an integer multiple of the combined GCD.
    """
    nu = [parse_rational(v) for v in demand]
    mu = [parse_rational(v) for v in supply]
    m, n = len(nu), len(mu)
    if sum(nu, Fraction(0)) != sum(mu, Fraction(0)):
        raise UnbalancedTotals("greedy extreme point needs balanced totals")
    for v in nu + mu:
        if v < 0:
            raise NegativeRate("rates must be nonnegative")
    active_i = set(range(1, m + 1))
    active_j = set(range(1, n + 1))
    explicit: Iterator[tuple[int, int]] | None = None
    if order is not None and order != "first-available":
        explicit = iter(list(order))
    entries: dict[tuple[int, int], Fraction] = {}
    while active_i and active_j:
        if explicit is None:
            i = min(active_i)
            j = min(active_j)
        else:
            try:
                i, j = next(explicit)
            except StopIteration:
                raise ValueError("explicit order exhausted before completion")
            if i not in active_i or j not in active_j:
                raise ValueError(f"order step ({i},{j}) references retired vertex")
        v = min(nu[i - 1], mu[j - 1])
        if v > 0:
            entries[(i, j)] = v
        if nu[i - 1] <= mu[j - 1]:
            active_i.discard(i)
        if nu[i - 1] >= mu[j - 1]:
            active_j.discard(j)
        nu[i - 1] -= v
        mu[j - 1] -= v
    return Assignment(m, n, entries)
