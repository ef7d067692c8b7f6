import random
from fractions import Fraction

import pytest

from procflex import make_instance


@pytest.fixture
def three_block_instance():
    """5x5 instance that splits into three pooling blocks.

    Blocks ({1},{2}), ({2,3},{1,3}) and ({4,5},{4,5}) are tied together by
    the redundant edges (1,3), (1,5) and (2,4).
    """
    return make_instance(
        [1, 1, 2, 2, 1],
        [2, 1, 1, 1, 2],
        [(1, 2), (1, 3), (1, 5), (2, 1), (2, 4), (3, 1), (3, 3), (4, 4), (4, 5), (5, 5)],
    )


@pytest.fixture
def four_pair_instance():
    """Four unit demand/supply pairs plus three extra edges, all redundant.

    Decomposes into four singleton blocks whose pooling DAG is
    1->2, 3->4, 1->4.
    """
    return make_instance(
        [1, 1, 1, 1],
        [1, 1, 1, 1],
        [(1, 1), (1, 2), (2, 2), (3, 3), (4, 4), (3, 4), (1, 4)],
    )


@pytest.fixture
def small_tree_instance():
    """Fully pooled 2x2 tree: ERP 1, no redundant edges."""
    return make_instance([2, 1], [2, 1], [(1, 1), (1, 2), (2, 1)])


def braess_instance(xi, with_extra_edge=False):
    """Three-queue system where adding edge (2,1) hurts the alternative gap.

    xi is the rate of the small standalone pair; supplies are imbalanced by
    +/- 1/10 around the two big queues.
    """
    edges = [(1, 1), (2, 2), (3, 3), (3, 2)]
    if with_extra_edge:
        edges.append((2, 1))
    return make_instance(
        [xi, 1, 1],
        [xi, Fraction(11, 10), Fraction(9, 10)],
        edges,
    )


def diagonal_instance(k):
    """k disjoint unit pairs: ERP k, the maximally unpooled baseline."""
    return make_instance([1] * k, [1] * k, [(i, i) for i in range(1, k + 1)])


def random_feasible_instance(rng: random.Random, max_m=6, max_n=6, max_rate=4):
    """Random balanced integer instance guaranteed feasible.

    Builds a random positive assignment first and reads rates off its
    row/column sums, then sprinkles extra edges; the generating assignment
    witnesses feasibility.
    """
    while True:
        m = rng.randint(1, max_m)
        n = rng.randint(1, max_n)
        entries = {}
        for i in range(1, m + 1):
            j = rng.randint(1, n)
            entries[(i, j)] = entries.get((i, j), 0) + rng.randint(1, max_rate)
        for j in range(1, n + 1):
            if not any(e[1] == j for e in entries):
                i = rng.randint(1, m)
                entries[(i, j)] = entries.get((i, j), 0) + rng.randint(1, max_rate)
        extra = rng.randint(0, m * n // 2)
        edges = set(entries)
        univ = [(i, j) for i in range(1, m + 1) for j in range(1, n + 1)]
        edges.update(rng.sample(univ, min(extra, len(univ))))
        nu = [0] * m
        mu = [0] * n
        for (i, j), v in entries.items():
            nu[i - 1] += v
            mu[j - 1] += v
        if all(v > 0 for v in nu) and all(v > 0 for v in mu):
            return make_instance(nu, mu, sorted(edges))
