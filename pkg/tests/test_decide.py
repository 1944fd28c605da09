import random
from fractions import Fraction as F

import pytest

from gen import rha
from tbreach.core import Automaton, Edge, Guard, Interval, ModelError, Rect, Reset, State, make_location, replay
from tbreach.decide import (Query, bound_formula, check, compute_bounds, decide_tb_reach, encode_skeleton)
from tbreach.lra import check_witness, feasible
from tbreach.models import fig1
from tbreach.normalize import OutOfClass
from tbreach.oracle import oracle_reach


def test_bound_formula_examples():
    assert bound_formula(2, 5, 7, 17, 1).E == 34
    b = bound_formula(2, 5, 7, 17, 0)
    assert (b.E, b.W) == (0, 0) and b.K == b.K_seg + 1
    assert (b.L, b.K_seg) == (1285, 6429)
    assert bound_formula(2, 5, 7, 17, 1).W == 18


def test_compute_bounds_counts_self_loops():
    h = fig1()
    b = compute_bounds(h, 1)
    assert b.L == 5 * (2 ** (7 + 5 + 1) + 1)
    assert b.equality_cap == 34


def test_skeleton_with_four_step_delays_is_unsat():
    # x = 23/25 after the third delay: e03 needs x = 1, so this edge sequence admits no run at all
    enc = encode_skeleton(fig1(), ["e01", "e10", "e03", "e34"])
    assert not feasible(enc.system).sat


def test_skeleton_of_witness_edges_is_sat():
    h = fig1()
    edges = ["e01", "e10", "e01", "e10", "e03", "e34"]
    enc = encode_skeleton(h, edges, T=1)
    res = feasible(enc.system)
    assert res.sat and check_witness(enc.system, res.witness)
    run = replay(h, State.initial(h), enc.path(h, edges, res.witness))
    assert run.last.loc == "l4" and run.duration <= 1


def test_skeleton_unreachable_guard_is_unsat():
    xs = ("x",)
    h = Automaton("z", xs, (make_location("a", xs, {"x": 0}), make_location("b", xs)),
                  (Edge("e", "a", "b", Guard.of(Rect("x", Interval.point(1))), Reset.of({})),), "a")
    assert not feasible(encode_skeleton(h, ["e"]).system).sat


def test_empty_skeleton_is_sat():
    res = feasible(encode_skeleton(fig1(), []).system)
    assert res.sat


def test_fig1_reachable_within_one():
    h = fig1()
    v = check(h, "l4", 1)
    assert v.reachable and v.witness.last.loc == "l4"
    assert replay(h, State.initial(h), v.witness.steps) == v.witness
    assert v.witness.duration <= 1


def test_fig1_not_reachable_at_four_step_duration():
    # the four-step example duration 139/250 is too short: the witness found above needs 5347/6250
    assert not check(fig1(), "l4", F(139, 250)).reachable


def test_goal_is_initial_location():
    v = check(fig1(), "l0", 0)
    assert v.reachable and len(v.witness.steps) == 0 and v.witness.duration == 0


def test_query_validation():
    with pytest.raises(ValueError):
        Query(fig1(), "l4", -1)
    with pytest.raises(ModelError):
        Query(fig1(), "nowhere", 1)


def test_out_of_class_rejected():
    xs = ("x",)
    h = Automaton("n", xs, (make_location("a", xs, {"x": -1}), make_location("b", xs)),
                  (Edge("e", "a", "b", Guard.of(), Reset.of({})),), "a")
    with pytest.raises(OutOfClass):
        check(h, "b", 1)


def test_monotone_in_time_bound():
    grid = [F(0), F(1, 4), F(1, 2), F(1), F(3, 2)]
    for seed in range(15):
        r = random.Random(900 + seed)
        h = rha(r, r.randint(2, 3), r.randint(1, 2), r.randint(2, 4), cmax=2)
        goal = f"l{len(h.locations) - 1}"
        verdicts = [check(h, goal, T).reachable for T in grid]
        assert verdicts == sorted(verdicts), (seed, verdicts)


def test_agrees_with_oracle_on_small_instances():
    for seed in range(20):
        r = random.Random(4000 + seed)
        h = rha(r, r.randint(1, 3), r.randint(1, 2), r.randint(1, 4), cmax=2)
        goal = f"l{len(h.locations) - 1}"
        o = oracle_reach(h, goal, 1, max_depth=60)
        if o is not None:
            assert check(h, goal, 1).reachable == o, seed


def test_parallel_search_is_deterministic():
    h = fig1()
    a = decide_tb_reach(Query(h, "l4", 1), jobs=1)
    b = decide_tb_reach(Query(h, "l4", 1), jobs=2)
    assert a.reachable == b.reachable
    assert a.witness.steps == b.witness.steps and a.skeleton == b.skeleton


def test_unbounded_search_agrees():
    h = fig1()
    assert decide_tb_reach(Query(h, "l4", 1), bounds=False).reachable
