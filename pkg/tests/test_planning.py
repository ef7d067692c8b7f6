"""Structured schedules, the planning DP, and greedy-vs-optimal comparisons."""

import math
from itertools import permutations

import pytest

from procflex import (
    EdgeAlreadyPresent,
    InvalidK,
    crp_decomposition,
    erp_trajectory,
    greedy_vs_optimal_report,
    make_instance,
    make_objective,
    plan_schedule,
    structured_schedule,
)


def diagonal(eta):
    return make_instance([1] * eta, [1] * eta, [(i, i) for i in range(1, eta + 1)])


def all_close_vectors(eta, K):
    out = [()]

    def rec(prefix, last):
        i = len(prefix) + 1
        for t in range(last + 2, min(eta + i - 1, K) + 1):
            out.append(prefix + (t,))
            rec(prefix + (t,), t)

    rec((), 0)
    return out


def test_trajectory_of_published_sequences(four_pair_instance):
    assert erp_trajectory(four_pair_instance, [(4, 3), (2, 1)]) == [3, 2]
    assert erp_trajectory(four_pair_instance, [(2, 3), (4, 1)]) == [4, 1]


def test_trajectory_constant_for_internal_edges(three_block_instance):
    # edges inside one block never change the count
    assert erp_trajectory(three_block_instance, [(2, 3), (5, 4)]) == [3, 3]


def test_trajectory_rejects_present_and_repeated_edges(four_pair_instance):
    with pytest.raises(EdgeAlreadyPresent):
        erp_trajectory(four_pair_instance, [(1, 1)])
    with pytest.raises(EdgeAlreadyPresent):
        erp_trajectory(four_pair_instance, [(2, 1), (2, 1)])


def test_structured_schedule_three_close_pattern():
    s = structured_schedule(9, 11, 3, (4, 8, 11))
    assert s.moves == (
        ("chain", 1, 2),
        ("chain", 2, 3),
        ("chain", 3, 4),
        ("close", 4, 1),
        ("chain", 4, 5),
        ("chain", 5, 6),
        ("chain", 6, 7),
        ("close", 7, 4),
        ("chain", 7, 8),
        ("chain", 8, 9),
        ("close", 9, 7),
    )
    assert s.trajectory() == (9, 9, 9, 6, 6, 6, 6, 3, 3, 3, 1)
    assert sum(1 for mv in s.moves if mv[0] == "chain") == 8
    assert sum(1 for mv in s.moves if mv[0] == "close") == 3


def test_structured_schedule_single_close_and_chain():
    s = structured_schedule(5, 7, 1, (5,))
    assert s.moves[4] == ("close", 5, 1)
    assert s.trajectory() == (5, 5, 5, 5, 1, 1, 1)
    assert s.moves[5] == ("filler",) and s.moves[6] == ("filler",)

    chain = structured_schedule(5, 3)
    assert chain.trajectory() == (5, 5, 5)
    assert all(mv[0] == "chain" for mv in chain.moves)


def test_structured_schedule_invalid_close_vectors():
    with pytest.raises(InvalidK):
        structured_schedule(2, 1, 1, (1,))  # no chain edge to cycle through yet
    with pytest.raises(InvalidK):
        structured_schedule(5, 9, 2, (3, 4))  # back-to-back closes reuse an edge
    with pytest.raises(InvalidK):
        structured_schedule(5, 9, 2, (4, 3))
    with pytest.raises(InvalidK):
        structured_schedule(3, 9, 1, (6,))  # beyond eta+i-1
    with pytest.raises(InvalidK):
        structured_schedule(5, 4, 1, (5,))  # beyond horizon
    with pytest.raises(InvalidK):
        structured_schedule(5, 4, 2, (3,))  # p and k disagree


def test_structured_trajectories_match_ground_truth():
    for eta, K in ((2, 2), (4, 6), (5, 12), (8, 12)):
        inst = diagonal(eta)
        for k in all_close_vectors(eta, K):
            s = structured_schedule(eta, K, len(k), k)
            try:
                edges = s.realize(inst)
            except ValueError:
                # schedules that never pool can exhaust the supply of
                # do-nothing edges; only filler steps may fail that way
                assert ("filler",) in s.moves
                continue
            assert tuple(erp_trajectory(inst, edges)) == s.trajectory(), (eta, K, k)


def test_plan_sum_nine_blocks():
    rep = plan_schedule(9, 11, "sum")
    assert rep.value == 61
    # returned trajectory must obey the induction for its own close vector
    k = rep.schedule.cycle_steps
    assert rep.trajectory == structured_schedule(9, 11, len(k), k).trajectory()
    # one known optimal vector
    obj = make_objective("sum", 9, 11)
    known = structured_schedule(9, 11, 3, (4, 8, 11))
    assert obj.total(known.trajectory()) == 61
    cf = rep.closed_form
    assert cf is not None
    assert (cf.p, cf.k) == (3, (4, 7, 9))
    assert cf.value == 62
    assert cf.matches_dp is False


def test_plan_final_nine_blocks():
    rep = plan_schedule(9, 11, "final")
    assert rep.schedule.cycle_steps == (9,)
    assert rep.trajectory == (9,) * 8 + (1, 1, 1)
    assert rep.value == 1
    assert rep.closed_form is None


def test_plan_two_blocks_one_step():
    rep = plan_schedule(2, 1, "sum")
    assert rep.schedule.cycle_steps == ()
    assert rep.trajectory == (2,)
    assert rep.value == 2
    assert rep.schedule.moves == (("chain", 1, 2),)


def test_plan_validates_arguments():
    with pytest.raises(ValueError):
        plan_schedule(0, 3, "sum")
    with pytest.raises(ValueError):
        plan_schedule(3, 0, "sum")
    with pytest.raises(ValueError):
        plan_schedule(3, 2, "nonsense")


def test_objective_tables():
    obj = make_objective([[0, 1, 2], [0, 0, "5/2"]], 3, 2)
    assert obj.kind == "tables"
    assert obj.total((3, 2)) == 2
    with pytest.raises(ValueError):
        make_objective([[2, 1, 0], [0, 0, 1]], 3, 2)  # decreasing table
    with pytest.raises(ValueError):
        make_objective([[0, 1]], 3, 2)  # wrong shape
    final = make_objective("final", 4, 3)
    assert final.total((4, 4, 2)) == 2
    assert final.total((4, 4, 4)) == 4


def test_min_single_close_reaching_full_pooling():
    for eta in range(2, 7):
        reached = [
            k1
            for k1 in range(2, eta + 1)
            if structured_schedule(eta, eta, 1, (k1,)).trajectory()[-1] == 1
        ]
        assert min(reached) == eta


def test_dp_matches_close_vector_enumeration():
    for eta, K in ((3, 5), (4, 7), (6, 9)):
        obj = make_objective("sum", eta, K)
        best = min(
            obj.total(structured_schedule(eta, K, len(k), k).trajectory())
            for k in all_close_vectors(eta, K)
        )
        assert plan_schedule(eta, K, "sum").value == best


def test_no_edge_sequence_beats_the_plan():
    # full enumeration over ordered tuples of distinct absent edges
    for eta in (2, 3):
        inst = diagonal(eta)
        absent = [
            (i, j) for i in range(1, eta + 1) for j in range(1, eta + 1) if i != j
        ]
        for K in (1, 2):
            obj = make_objective("sum", eta, K)
            dp = plan_schedule(eta, K, "sum").value
            best = None
            for seq in permutations(absent, K):
                cur = inst
                traj = []
                for e in seq:
                    cur = cur.with_edge(e)
                    traj.append(crp_decomposition(cur).erp_number)
                val = obj.total(traj)
                best = val if best is None else min(best, val)
            assert best == dp, (eta, K)


def test_scaling_of_close_count_and_value():
    rows = []
    for eta in (4, 9, 16, 25):
        K = eta + math.ceil(math.sqrt(eta)) + 1
        rep = plan_schedule(eta, K, "sum")
        obj = make_objective("sum", eta, K)
        single = structured_schedule(eta, K, 1, (eta,))
        rows.append((eta, rep.schedule.p, rep.value, obj.total(single.trajectory())))
    assert [(r[1], r[2]) for r in rows] == [(2, 15), (3, 63), (5, 181), (6, 419)]
    for (e1, p1, v1, c1), (e2, p2, v2, c2) in zip(rows, rows[1:]):
        assert p1 <= p2
        # one close only: quadratic cost pulls away from the optimum
        assert c1 * v2 < c2 * v1
        # optimum grows slower than eta squared
        assert v1 * e2**2 > v2 * e1**2
    for eta, p, _v, _c in rows:
        root = math.sqrt(eta)
        assert root / 2 <= p <= 2 * root


def test_greedy_vs_optimal_four_pair(four_pair_instance):
    rep = greedy_vs_optimal_report(four_pair_instance, 2, "final")
    assert rep.greedy_edges == ((2, 1), (4, 1))
    assert rep.greedy_trajectory == (3, 2)
    assert rep.greedy_value == 2
    assert rep.optimal_mode == "exhaustive"
    assert rep.optimal_edges == ((2, 3), (4, 1))
    assert rep.optimal_trajectory == (4, 1)
    assert rep.optimal_value == 1
    rows = rep.rows()
    assert rows[0]["greedy_edge"] == (2, 1) and rows[1]["optimal_erp"] == 1


def test_greedy_vs_optimal_diagonal_sum():
    rep = greedy_vs_optimal_report(diagonal(3), 3, "sum")
    assert rep.optimal_mode == "structured"
    assert rep.greedy_value == 7
    assert rep.optimal_value == 7
    assert rep.optimal_trajectory == (3, 2, 2)


def test_greedy_vs_optimal_edge_cases(four_pair_instance):
    rep = greedy_vs_optimal_report(four_pair_instance, 0)
    assert rep.rows() == []
    assert rep.greedy_value == 0 and rep.optimal_value == 0

    big = make_instance(
        [1] * 6, [1] * 6, [(i, i) for i in range(1, 7)] + [(1, 2)]
    )
    rep = greedy_vs_optimal_report(big, 3, "sum")
    assert rep.optimal_mode == "unavailable"
    assert rep.optimal_edges is None
    assert "brute-force" in rep.note
