"""Sparsest flexibility-graph construction for a target pooling count.

Given rates (demand, supply) and a target number d of pooling blocks, builds
an edge set of provably minimum size whose polytope has exactly d blocks.
The achievable range of d is [1, d_double_star]; below d_star a single extra
edge (one cycle) is needed, hence the 1{d < d_star} term in the edge count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    Assignment,
    ProblemInstance,
    greedy_extreme_point,
    gcd_combined,
    make_instance,
    parse_rational,
    support_graph,
)
from .decomposition import crp_decomposition
from .errors import (
    InternalMergeStuck,
    InvariantViolation,
    SizeLimitExceeded,
    TargetAboveDstarStar,
    UnbalancedTotals,
    ZeroVector,
)

__all__ = [
    "BalancedCover",
    "DesignResult",
    "d_star",
    "max_balanced_cover",
    "min_edges",
    "design_flexibility",
]


def _rates(demand, supply) -> tuple[list[Fraction], list[Fraction]]:
    nu = [parse_rational(v) for v in demand]
    mu = [parse_rational(v) for v in supply]
    if sum(nu, Fraction(0)) != sum(mu, Fraction(0)):
        raise UnbalancedTotals("demand and supply totals differ")
    return nu, mu


def d_star(demand, supply) -> int:
    """Fewest components any extreme-point support can have.

    With rates scaled to integers by their combined GCD, an extreme point is
    an integer matrix whose forest support carries at least 1 per edge, so it
    has at most total-units edges and at least m+n-total components.
    """
    nu, mu = _rates(demand, supply)
    g = gcd_combined(nu, mu)
    units = int(sum(nu, Fraction(0)) / g)
    return max(1, len(nu) + len(mu) - units)


@dataclass(frozen=True)
class BalancedCover:
    """Partition of demands and supplies into balanced blocks."""

    parts: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    @property
    def cardinality(self) -> int:
        return len(self.parts)


def _lex_subsets(indices: Sequence[int], must_contain: int | None = None):
    """All nonempty subsets in lexicographic order of their sorted tuples."""
    pool = sorted(indices)
    out = []
    for r in range(1, len(pool) + 1):
        for sub in itertools.combinations(pool, r):
            if must_contain is None or must_contain in sub:
                out.append(sub)
    out.sort()
    return out


def max_balanced_cover(demand, supply, limit: int = 24) -> BalancedCover:
    """Balanced cover with the most blocks (their count is d_double_star).

    Subset dynamic programming: the block containing the lowest remaining
    demand is enumerated in lexicographic order (likewise its supply side),
    so ties resolve toward lexicographically smallest parts.  Exponential;
    refuses instances with m+n above `limit`.
    """
    nu, mu = _rates(demand, supply)
    m, n = len(nu), len(mu)
    if m + n > limit:
        raise SizeLimitExceeded(f"m+n={m+n} exceeds cover search limit {limit}")
    for v in nu + mu:
        if v <= 0:
            raise ZeroVector("cover search needs strictly positive rates")

    memo: dict = {}

    def rec(di: tuple[int, ...], sj: tuple[int, ...]):
        if not di and not sj:
            return 0, ()
        if not di or not sj:
            return None
        key = (di, sj)
        if key in memo:
            return memo[key]
        first = di[0]
        best = None
        for asub in _lex_subsets(di, must_contain=first):
            target = sum((nu[i - 1] for i in asub), Fraction(0))
            for bsub in _lex_subsets(sj):
                if sum((mu[j - 1] for j in bsub), Fraction(0)) != target:
                    continue
                rest = rec(
                    tuple(i for i in di if i not in asub),
                    tuple(j for j in sj if j not in bsub),
                )
                if rest is None:
                    continue
                cand = (1 + rest[0], ((asub, bsub),) + rest[1])
                if best is None or cand[0] > best[0]:
                    best = cand
        memo[key] = best
        return best

    result = rec(tuple(range(1, m + 1)), tuple(range(1, n + 1)))
    if result is None:
        raise InvariantViolation("balanced instance admits no balanced cover")
    return BalancedCover(result[1])


def min_edges(demand, supply, d: int) -> int:
    """Fewest edges of any graph whose polytope has exactly d blocks."""
    nu, mu = _rates(demand, supply)
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"target block count must be a positive integer, got {d!r}")
    dss = max_balanced_cover(nu, mu).cardinality
    if d > dss:
        raise TargetAboveDstarStar(f"target {d} exceeds achievable maximum {dss}")
    ds = d_star(nu, mu)
    return len(nu) + len(mu) - d + (1 if d < ds else 0)


@dataclass(frozen=True)
class DesignResult:
    demand: tuple[Fraction, ...]
    supply: tuple[Fraction, ...]
    edges: frozenset[tuple[int, int]]
    assignment: Assignment
    achieved_erp: int
    edge_count: int
    used_cycle: bool

    def instance(self) -> ProblemInstance:
        return make_instance(self.demand, self.supply, sorted(self.edges))


def _merge_components(x_entries: dict, comp_edges: list[list[tuple[int, int]]]):
    """One merge step: move flow so two components join and net one edge
    appears.  Needs two edges with unequal flows in different components;
    scans components by label and edges lexicographically."""
    for a in range(len(comp_edges)):
        for b in range(a + 1, len(comp_edges)):
            for e1 in sorted(comp_edges[a]):
                for e2 in sorted(comp_edges[b]):
                    if x_entries[e1] != x_entries[e2]:
                        return (a, b, e1, e2) if x_entries[e1] < x_entries[e2] else (
                            b,
                            a,
                            e2,
                            e1,
                        )
    return None


def design_flexibility(demand, supply, d: int) -> DesignResult:
    """Minimum-size edge set with exactly d pooling blocks, plus a witness.

    Phase 0 builds a maximally split extreme point (one greedy extreme point
    per block of a maximum balanced cover).  Phase 1 repeatedly merges two
    components while the count exceeds max(d, d_star); each merge is a flow
    swap that keeps the point extreme and adds net one edge.  Phase 2, only
    needed when d < d_star, links the remaining surplus components in one
    cycle by splitting half the minimum representative flow around it.
    """
    nu, mu = _rates(demand, supply)
    m, n = len(nu), len(mu)
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"target block count must be a positive integer, got {d!r}")
    cover = max_balanced_cover(nu, mu)
    dss = cover.cardinality
    if d > dss:
        raise TargetAboveDstarStar(f"target {d} exceeds achievable maximum {dss}")
    ds = d_star(nu, mu)

    entries: dict[tuple[int, int], Fraction] = {}
    for dset, sset in cover.parts:
        part = greedy_extreme_point(
            [nu[i - 1] for i in dset], [mu[j - 1] for j in sset]
        )
        for (a, b), v in part.entries.items():
            entries[(dset[a - 1], sset[b - 1])] = v

    def components() -> list[list[tuple[int, int]]]:
        g = support_graph(Assignment(m, n, entries))
        buckets: dict[int, list] = {}
        for (i, j) in entries:
            buckets.setdefault(g.demand_labels[i - 1], []).append((i, j))
        # order component buckets by their smallest edge for determinism
        return [buckets[k] for k in sorted(buckets, key=lambda k: min(buckets[k]))]

    comps = components()
    if len(comps) != dss:
        raise InvariantViolation(
            f"seed extreme point has {len(comps)} components, expected {dss}"
        )

    target_comps = max(d, ds)
    while len(comps) > target_comps:
        pick = _merge_components(entries, comps)
        if pick is None:
            raise InternalMergeStuck(
                "no component pair with unequal flows; cannot merge further"
            )
        _a, _b, (i1, j1), (i2, j2) = pick
        theta = entries[(i1, j1)]
        entries[(i2, j2)] -= theta
        del entries[(i1, j1)]
        entries[(i2, j1)] = entries.get((i2, j1), Fraction(0)) + theta
        entries[(i1, j2)] = entries.get((i1, j2), Fraction(0)) + theta
        comps = components()

    used_cycle = False
    if d < ds:
        used_cycle = True
        e = ds - d + 1
        reps = [min(comp) for comp in comps[:e]]
        theta = min(entries[r] for r in reps) / 2
        for idx, (i, j) in enumerate(reps):
            # half the minimum keeps every representative edge positive
            entries[(i, j)] -= theta
            nxt = reps[(idx + 1) % e]
            entries[(i, nxt[1])] = entries.get((i, nxt[1]), Fraction(0)) + theta

    x = Assignment(m, n, entries)
    edges = x.support()
    inst = make_instance(nu, mu, sorted(edges))
    achieved = crp_decomposition(inst).erp_number
    if achieved != d:
        raise InvariantViolation(f"designed graph has {achieved} blocks, wanted {d}")
    return DesignResult(
        demand=tuple(nu),
        supply=tuple(mu),
        edges=edges,
        assignment=x,
        achieved_erp=achieved,
        edge_count=len(edges),
        used_cycle=used_cycle,
    )
