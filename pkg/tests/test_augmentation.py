"""Edge-addition effects and the best-single-edge rule."""

import itertools
import random

import pytest

from procflex import (
    AlreadyCrp,
    EdgeAlreadyPresent,
    IndexOutOfRange,
    add_edge_effect,
    best_single_edge,
    crp_decomposition,
)

from .conftest import random_feasible_instance


def all_absent_edges(inst):
    return [
        (i, j)
        for i in range(1, inst.m + 1)
        for j in range(1, inst.n + 1)
        if (i, j) not in inst.edges
    ]


def test_three_block_best_edge_closes_everything(three_block_instance):
    edge, eff = best_single_edge(three_block_instance)
    assert edge == (4, 2)
    assert eff.dag_edge == (3, 1)
    assert eff.cycle_vertices == frozenset({1, 2, 3})
    assert eff.new_erp == 1 and eff.delta == -2


def test_four_pair_greedy_path(four_pair_instance):
    inst = four_pair_instance
    expected = [((2, 1), {1, 2}, 3), ((4, 1), {1, 3}, 2), ((1, 3), {1, 2}, 1)]
    for want_edge, want_cycle, want_erp in expected:
        edge, eff = best_single_edge(inst)
        assert edge == want_edge
        assert eff.cycle_vertices == frozenset(want_cycle)
        assert eff.new_erp == want_erp
        inst = inst.with_edge(edge)
    assert crp_decomposition(inst).erp_number == 1


def test_four_pair_two_step_shortcut(four_pair_instance):
    # a neutral first edge can set up a single closing second edge
    eff1 = add_edge_effect(four_pair_instance, (2, 3))
    assert eff1.delta == 0 and eff1.new_erp == 4
    staged = four_pair_instance.with_edge((2, 3))
    eff2 = add_edge_effect(staged, (4, 1))
    assert eff2.new_erp == 1
    assert eff2.cycle_vertices == frozenset({1, 2, 3, 4})


def test_add_edge_effect_errors(four_pair_instance):
    with pytest.raises(EdgeAlreadyPresent):
        add_edge_effect(four_pair_instance, (1, 1))
    eff = add_edge_effect(four_pair_instance, (1, 1), allow_existing=True)
    assert eff.delta == 0 and eff.cycle_vertices == frozenset()
    assert eff.new_erp == 4
    with pytest.raises(IndexOutOfRange):
        add_edge_effect(four_pair_instance, (0, 1))
    with pytest.raises(IndexOutOfRange):
        add_edge_effect(four_pair_instance, (1, 5))


def test_best_single_edge_on_pooled_graph(small_tree_instance):
    with pytest.raises(AlreadyCrp):
        best_single_edge(small_tree_instance)


def test_effect_agrees_with_recomputation():
    rng = random.Random(31)
    checked = 0
    for _ in range(60):
        inst = random_feasible_instance(rng, 5, 5, 4)
        before = crp_decomposition(inst).erp_number
        for edge in all_absent_edges(inst):
            eff = add_edge_effect(inst, edge)
            after = crp_decomposition(inst.with_edge(edge)).erp_number
            assert eff.new_erp == after, (inst, edge)
            assert eff.delta == after - before
            assert eff.delta <= 0
            assert eff.new_erp >= 1
            checked += 1
    assert checked >= 200


def test_best_edge_attains_the_optimum_merge():
    rng = random.Random(47)
    nontrivial = 0
    for _ in range(80):
        inst = random_feasible_instance(rng, 5, 5, 4)
        dec = crp_decomposition(inst)
        absent = all_absent_edges(inst)
        if dec.erp_number == 1 or not absent:
            continue
        best_delta = min(add_edge_effect(inst, e).delta for e in absent)
        edge, eff = best_single_edge(inst)
        assert eff.delta == best_delta
        assert edge in absent
        if best_delta < 0:
            nontrivial += 1
    assert nontrivial >= 10


def test_tie_break_prefers_smallest_pair():
    # fully separate diagonal pairs: every cross edge merges at most two
    # blocks only after a first neutral edge, so the first pick is neutral
    # and must be the smallest absent pair
    from procflex import make_instance

    inst = make_instance([1, 1, 1], [1, 1, 1], [(i, i) for i in range(1, 4)])
    edge, eff = best_single_edge(inst)
    assert edge == (1, 2)
    assert eff.delta == 0


def test_sequences_of_two_edges_explore_all(four_pair_instance):
    # exhaustive scan over ordered pairs of distinct absent edges: the best
    # final block count is 1 and (2,3)->(4,1) attains it
    inst = four_pair_instance
    absent = all_absent_edges(inst)
    best = None
    for a, b in itertools.permutations(absent, 2):
        final = crp_decomposition(inst.with_edge(a).with_edge(b)).erp_number
        if best is None or final < best[0]:
            best = (final, a, b)
    assert best[0] == 1
    assert (
        crp_decomposition(inst.with_edge((2, 3)).with_edge((4, 1))).erp_number == 1
    )
