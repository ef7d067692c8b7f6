import random
from fractions import Fraction

import pytest

import procflex as pf
from procflex.core import check_assignment
from procflex.decomposition import WorkCounter, full_support_point, witness_point

from .conftest import random_feasible_instance
from . import oracles


def test_redundant_edges_three_block(three_block_instance):
    assert pf.redundant_edges(three_block_instance) == {(1, 3), (1, 5), (2, 4)}


def test_redundant_edges_four_pair(four_pair_instance):
    assert pf.redundant_edges(four_pair_instance) == {(1, 2), (3, 4), (1, 4)}


def test_redundant_edges_none_when_pooled(small_tree_instance):
    assert pf.redundant_edges(small_tree_instance) == frozenset()


def test_redundant_edges_seed_independent(three_block_instance, four_pair_instance):
    for inst in (three_block_instance, four_pair_instance):
        results = {pf.redundant_edges(inst, order_seed=s) for s in range(4)}
        assert len(results) == 1


def test_redundancy_oracle_spot_checks(three_block_instance):
    assert pf.redundancy_oracle(three_block_instance, (2, 4)) is True
    assert pf.redundancy_oracle(three_block_instance, (4, 5)) is False
    one = pf.make_instance([1], [1], [(1, 1)])
    assert pf.redundancy_oracle(one, (1, 1)) is False
    with pytest.raises(pf.EdgeNotPresent):
        pf.redundancy_oracle(three_block_instance, (5, 1))


def test_oracle_equivalence_bulk():
    rng = random.Random(74)
    for _ in range(210):
        inst = random_feasible_instance(rng, max_m=6, max_n=6)
        algo = pf.redundant_edges(inst)
        per_edge = {e for e in inst.sorted_edges if pf.redundancy_oracle(inst, e)}
        assert algo == per_edge


def test_algorithm_matches_vertex_enumeration():
    rng = random.Random(75)
    for _ in range(40):
        inst = random_feasible_instance(rng, max_m=3, max_n=3)
        assert pf.redundant_edges(inst) == oracles.vertex_redundant_edges(inst)


def test_work_bound(three_block_instance):
    cases = [three_block_instance]
    rng = random.Random(99)
    for _ in range(20):
        cases.append(random_feasible_instance(rng, max_m=6, max_n=6))
    for inst in cases:
        counter = WorkCounter()
        pf.redundant_edges(inst, counter=counter)
        bound = 4 * (inst.m + inst.n) * (inst.m + inst.n + len(inst.edges))
        assert counter.ops <= bound


def test_decomposition_three_block(three_block_instance):
    dec = pf.crp_decomposition(three_block_instance)
    assert dec.erp_number == 3
    assert [(c.demands, c.supplies) for c in dec.components] == [
        ((1,), (2,)),
        ((2, 3), (1, 3)),
        ((4, 5), (4, 5)),
    ]
    assert dec.redundant_edges == {(1, 3), (1, 5), (2, 4)}
    covered = set()
    for c in dec.components:
        covered |= c.edges
    assert covered == three_block_instance.edges - dec.redundant_edges


def test_decomposition_four_pair(four_pair_instance):
    dec = pf.crp_decomposition(four_pair_instance)
    assert dec.erp_number == 4
    assert [(c.demands, c.supplies) for c in dec.components] == [
        ((1,), (1,)),
        ((2,), (2,)),
        ((3,), (3,)),
        ((4,), (4,)),
    ]


def test_decomposition_component_invariants():
    rng = random.Random(4242)
    for _ in range(60):
        inst = random_feasible_instance(rng, max_m=5, max_n=5)
        dec = pf.crp_decomposition(inst)
        seen_d: set = set()
        seen_s: set = set()
        union_edges: set = set()
        for comp in dec.components:
            assert not (set(comp.demands) & seen_d)
            assert not (set(comp.supplies) & seen_s)
            seen_d |= set(comp.demands)
            seen_s |= set(comp.supplies)
            union_edges |= comp.edges
            dsum = sum((inst.demand[i - 1] for i in comp.demands), Fraction(0))
            ssum = sum((inst.supply[j - 1] for j in comp.supplies), Fraction(0))
            assert dsum == ssum
        assert seen_d == set(range(1, inst.m + 1))
        assert seen_s == set(range(1, inst.n + 1))
        assert union_edges == inst.edges - dec.redundant_edges


def test_components_individually_pooled():
    rng = random.Random(515)
    for _ in range(25):
        inst = random_feasible_instance(rng, max_m=5, max_n=5)
        dec = pf.crp_decomposition(inst)
        from procflex.decomposition import _sub_instance

        for comp in dec.components:
            sub = _sub_instance(inst, comp.demands, comp.supplies)
            assert pf.crp_condition(sub)


def test_crp_condition_examples(small_tree_instance, four_pair_instance):
    assert pf.crp_condition(small_tree_instance) is True
    assert pf.crp_condition(four_pair_instance) is False
    disconnected = pf.make_instance([1, 1], [1, 1], [(1, 1), (2, 2)])
    assert pf.crp_condition(disconnected) is False


def test_crp_condition_matches_strict_subset_scan():
    rng = random.Random(81)
    for _ in range(120):
        inst = random_feasible_instance(rng, max_m=5, max_n=5)
        assert pf.crp_condition(inst) == oracles.strict_pooling_condition(inst)


def test_crp_graph_four_pair(four_pair_instance):
    dec = pf.crp_decomposition(four_pair_instance)
    dag = pf.crp_graph(dec, four_pair_instance)
    assert dag.d == 4
    assert dict(dag.edges) == {(1, 2): 1, (3, 4): 1, (1, 4): 1}
    assert dag.edge_multiplicity_total == len(dec.redundant_edges)


def test_crp_graph_three_block(three_block_instance):
    dec = pf.crp_decomposition(three_block_instance)
    dag = pf.crp_graph(dec, three_block_instance)
    assert dict(dag.edges) == {(1, 2): 1, (1, 3): 1, (2, 3): 1}


def test_crp_graph_single_component(small_tree_instance):
    dec = pf.crp_decomposition(small_tree_instance)
    dag = pf.crp_graph(dec, small_tree_instance)
    assert dag.d == 1
    assert not dag.edges


def test_crp_graph_acyclic_bulk():
    rng = random.Random(303)
    for _ in range(80):
        inst = random_feasible_instance(rng, max_m=6, max_n=6)
        dec = pf.crp_decomposition(inst)
        dag = pf.crp_graph(dec, inst)  # raises InvariantViolation on a cycle
        assert dag.edge_multiplicity_total == len(dec.redundant_edges)


def test_ssc_basis(three_block_instance, small_tree_instance, four_pair_instance):
    dec = pf.crp_decomposition(three_block_instance)
    basis = pf.ssc_basis(dec)
    assert basis.vectors == (
        (1, 0, 0, 0, 0),
        (0, 1, 1, 0, 0),
        (0, 0, 0, 1, 1),
    )
    assert basis.dimension == 3
    assert pf.ssc_basis(pf.crp_decomposition(small_tree_instance)).vectors == ((1, 1),)
    four = pf.ssc_basis(pf.crp_decomposition(four_pair_instance))
    assert four.dimension == 4
    # orthogonal 0/1 vectors partitioning the demand index set
    counts = [sum(col) for col in zip(*four.vectors)]
    assert counts == [1, 1, 1, 1]


def test_witness_and_full_support(three_block_instance):
    er = pf.redundant_edges(three_block_instance)
    for edge in three_block_instance.sorted_edges:
        w = witness_point(three_block_instance, edge)
        if edge in er:
            assert w is None
        else:
            check_assignment(three_block_instance, w)
            assert w.value(*edge) > 0
    xbar = full_support_point(three_block_instance)
    check_assignment(three_block_instance, xbar)
    assert xbar.support() == three_block_instance.edges - er


def test_full_support_bulk():
    rng = random.Random(8080)
    for _ in range(40):
        inst = random_feasible_instance(rng, max_m=5, max_n=5)
        er = pf.redundant_edges(inst)
        xbar = full_support_point(inst)
        check_assignment(inst, xbar)
        assert xbar.support() == inst.edges - er


def test_verify_decomposition_orders(three_block_instance, small_tree_instance):
    assert pf.verify_decomposition(three_block_instance, [{4, 5}, {2, 3}, {1}])
    assert not pf.verify_decomposition(three_block_instance, [{1}, {2, 3}, {4, 5}])
    assert pf.verify_decomposition(small_tree_instance, [{1, 2}])


def test_verify_decomposition_partition_errors(three_block_instance):
    with pytest.raises(pf.NotAPartition):
        pf.verify_decomposition(three_block_instance, [{1, 2}, {2, 3}, {4, 5}])
    with pytest.raises(pf.NotAPartition):
        pf.verify_decomposition(three_block_instance, [{1, 2}, {3}])
    with pytest.raises(pf.NotAPartition):
        pf.verify_decomposition(three_block_instance, [set(), {1, 2, 3, 4, 5}])


def test_verify_accepts_computed_decomposition():
    rng = random.Random(99021)
    for _ in range(30):
        inst = random_feasible_instance(rng, max_m=5, max_n=5)
        dec = pf.crp_decomposition(inst)
        # feed the components back in reverse pooling order: sinks first
        dag = pf.crp_graph(dec, inst)
        order = sorted(
            range(1, dec.erp_number + 1),
            key=lambda l: len(dag.descendants(l)),
        )
        cover = [set(dec.components[l - 1].demands) for l in order]
        assert pf.verify_decomposition(inst, cover)
