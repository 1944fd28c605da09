import math
from fractions import Fraction as F

import pytest

from tbreach.core import ModelError, State, TimedStep, classify, replay
from tbreach.dsl import parse_model, print_model
from tbreach.reductions import (compile_diagonal, compile_negrates, corpus, cosimulate, division_gadget,
                                parse_machine, run_machine)
from tbreach.reductions.minsky import format_machine
from tbreach.reductions.simulate import drive, earliest


def machine(text):
    return parse_machine("init q0\nfinal qf\n" + text)


def test_run_machine_examples():
    t = run_machine(machine("q0: inc c -> qf\n"), 10)
    assert t.accepted and t.length == 1 and t.configs[-1].v == (1, 0)
    t = run_machine(machine("q0: ifz c -> qf else dec -> q0\n"), 10)
    assert t.accepted and t.configs[-1].v == (0, 0)
    t = run_machine(machine("q0: inc c -> q0\n"), 50)
    assert not t.accepted and not t.halted and t.length == 50


def test_stuck_machine_halts_without_accepting():
    t = run_machine(corpus()["stuck"], 10)
    assert t.halted and not t.accepted


def test_parse_machine_errors_and_round_trip():
    with pytest.raises(ModelError):
        parse_machine("init q0\nfinal qf\nq0: jump -> qf\n")
    with pytest.raises(ModelError):
        machine("q0: inc c -> qf\nq0: inc d -> qf\n")
    for m in corpus().values():
        assert parse_machine(format_machine(m)) == m


def test_division_gadget_quarter():
    h = division_gadget(2)
    s0 = State.of("in", {"x": 1, "y": 0})
    run = replay(h, s0, (TimedStep(0, "enter"), TimedStep(F(1, 2), "half"), TimedStep(F(1, 4), "leave")))
    assert run.duration == F(3, 4)
    assert run.last == State.of("out", {"x": F(1, 4), "y": 0})


def test_division_gadget_earliest_events():
    h = division_gadget(3)
    s = State.of("A", {"x": F(1, 2), "y": 0})
    assert earliest(h, s, "half") == F(1, 6)


def test_negrates_inc_once_tick_values():
    rep = cosimulate(compile_negrates(machine("q0: inc c -> qf\n")), 4)
    assert rep.ok and rep.reached_goal
    got = {(c.step, c.quantity): c.observed for c in rep.checks}
    assert got[(0, "time")] == 0 and got[(0, "x_c")] == 1
    assert got[(1, "time")] == F(3, 4) and got[(1, "x_c")] == F(1, 16)
    assert got[(1, "x_d")] == F(1, 4)
    assert rep.duration <= 1


def test_negrates_is_outside_decidable_class():
    c = classify(compile_negrates(corpus()["transfer"]).automaton)
    assert not c.non_negative and c.diagonal_free


def test_diagonal_is_outside_decidable_class():
    c = classify(compile_diagonal(corpus()["transfer"]).automaton)
    assert c.non_negative and not c.diagonal_free and c.singular


def test_diagonal_two_increments_from_three():
    m = machine("q0: inc c -> q1\nq1: inc c -> q2\nq2: ifz c -> qf else dec -> q2\n")
    rep = cosimulate(compile_diagonal(m, init=3), 10)
    assert rep.ok and rep.reached_goal
    after = {c.step: c.observed for c in rep.checks if c.quantity == "|x-y| c_bot"}
    assert after[0] == F(1, 8)
    assert after[4] == F(1, 32)


def test_diagonal_rounds_halve_or_maintain():
    m = corpus()["transfer"]
    k = math.ceil(math.log2(run_machine(m, 20).length) + 1)
    rep = cosimulate(compile_diagonal(m), 20, init_rounds=k)
    assert rep.ok and rep.reached_goal and rep.duration <= 3
    kinds = {rd.kind for rd in rep.rounds}
    assert kinds == {"inc", "maintain"}
    for rd in rep.rounds:
        gap = abs(rd.before[0] - rd.before[1])
        assert rd.duration == (gap if rd.kind == "inc" else 2 * gap)


def test_diagonal_explicit_init_budget():
    m = corpus()["inc3_dec3"]
    rep = cosimulate(compile_diagonal(m, init=4), 20)
    assert rep.ok and rep.reached_goal and rep.duration <= 1


def test_non_halting_machine_never_reaches_goal():
    rep = cosimulate(compile_negrates(corpus()["inc_forever"]), 6)
    assert rep.ok and not rep.reached_goal


def test_compiled_models_round_trip():
    for m in corpus().values():
        for h in (compile_negrates(m).automaton, compile_diagonal(m).automaton, compile_diagonal(m, 2).automaton):
            assert parse_model(print_model(h)) == h


def test_drive_stops_when_nothing_fires():
    h = division_gadget(2)
    run = drive(h, lambda s, steps, out: out, lambda s, steps: False)
    # from x = y = 0 the gadget passes through with zero delays
    assert run.last.loc == "out" and run.duration == 0
