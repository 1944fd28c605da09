import random
from fractions import Fraction as F

import pytest

from gen import rha
from tbreach.core import (FALSE, TRUE, Automaton, Diag, Edge, Guard, Interval, Rect, Reset, State, TimedStep,
                          classify, make_location, replay)
from tbreach.normalize import (OutOfClass, adapt_int, adapt_reset, cbound, dreset, h3_violations,
                               normalize_pipeline, reduce_guard, strict)
from tbreach.models import fig1
from tbreach.oracle import oracle_reach

X1 = Rect("x", Interval.from_relation("<=", 1))


def r(var, rel, k):
    return Rect(var, Interval.from_relation(rel, k))


def test_reduce_guard():
    assert reduce_guard(Guard.of(X1, X1)) == Guard.of(X1)
    assert reduce_guard(Guard.of(X1, FALSE)).is_false
    assert reduce_guard(Guard.of(TRUE, Rect("y", Interval.point(1)))) == Guard.of(Rect("y", Interval.point(1)))


def test_adapt_reset_examples():
    g = Guard.of(Rect("x", Interval.closed(2, 3)))
    assert adapt_reset(g, {"x": Interval.point(1)}) == Guard.of(Rect("x", Interval.closed(1, 2)))
    assert adapt_reset(g, {"x": Interval.point(0)}) == g
    assert adapt_reset(g, {"x": Interval.closed(0, 1)}) == Guard.of(Rect("x", Interval.closed(1, 3)))


def test_adapt_reset_rejects_diagonal():
    with pytest.raises(OutOfClass):
        adapt_reset(Guard.of(Diag("x", "y", "<", 1)), {})


def test_adapt_int_case_table():
    assert adapt_int(Guard.of(r("x", "<=", 2)), {"x": 2}) == Guard.of(Rect("x", Interval.point(0)))
    assert adapt_int(Guard.of(r("x", ">=", 3)), {"x": 2}) == Guard.of(Rect("x", Interval.point(1)))
    assert adapt_int(Guard.of(r("x", "<", 5)), {"x": 2}).is_true
    assert adapt_int(Guard.of(r("x", "<=", 1)), {"x": 2}).is_false
    assert adapt_int(Guard.of(Rect("x", Interval.point(2))), {"x": 2}) == Guard.of(Rect("x", Interval.point(0)))
    assert adapt_int(Guard.of(r("x", ">", 2)), {"x": 2}) == Guard.of(r("x", ">", 0))


def _one_var(guard_k: int, reset: dict) -> Automaton:
    xs = ("x",)
    return Automaton("one", xs, (make_location("a", xs, {"x": 1}), make_location("b", xs, {"x": 1})),
                     (Edge("e", "a", "b", Guard.of(Rect("x", Interval.point(guard_k))), Reset.of(reset)),), "a")


def test_dreset_shifts_successor_guards():
    xs = ("x",)
    h = Automaton("nd", xs, (make_location("a", xs), make_location("b", xs), make_location("c", xs)),
                  (Edge("r", "a", "b", TRUE, Reset.of({"x": Interval.closed(1, 2)})),
                   Edge("g", "b", "c", Guard.of(Rect("x", Interval.closed(2, 3))), Reset.of({}))), "a")
    out = dreset(h).automaton
    assert classify(out).deterministic_resets
    (r_edge,) = [e for e in out.edges if e.name.startswith("r@")]
    assert r_edge.reset.get("x") == Interval.point(0)
    (g_edge,) = [e for e in out.edges if e.name.startswith("g@")]
    assert g_edge.guard == Guard.of(Rect("x", Interval.closed(0, 2)))


def test_dreset_is_identity_shape_for_zero_resets():
    h = fig1()
    n = dreset(h)
    assert len(n.automaton.locations) == len(h.locations)
    assert len(n.automaton.edges) == len(h.edges)
    assert set(n.loc_map.values()) == {l.name for l in h.locations}


def test_cbound_wrap_then_adapted_guard():
    n = cbound(_one_var(2, {}))
    h = n.automaton
    # duration-2 run becomes a wrap at time 1, then e at the adapted guard x = 0 with i = 2
    path = (TimedStep(1, "wrap.x@a[0]"), TimedStep(1, "wrap.x@a[1]"), TimedStep(0, "e@a[2]"))
    run = replay(h, State.initial(h), path)
    assert run.last.loc == "b[2]" and run.duration == 2
    assert h.edge("e@a[2]").guard == Guard.of(Rect("x", Interval.point(0)))
    assert all(v <= 1 for s in run.states for v in s.valuation.values())


def test_cbound_saturation_with_cap_zero():
    xs = ("x",)
    h = Automaton("z", xs, (make_location("a", xs, {"x": 1}),), (), "a")
    out = cbound(h, cap=0).automaton
    assert [l.name for l in out.locations] == ["a[0]"]
    assert out.edge("wrap.x@a[0]").trg == "a[0]"


def test_cbound_rejects_negative_rates():
    xs = ("x",)
    h = Automaton("n", xs, (make_location("a", xs, {"x": -1}),), (), "a")
    with pytest.raises(OutOfClass):
        cbound(h)


def test_strict_combines_zero_time_path():
    xs = ("x",)
    h = Automaton("s", xs, (make_location("a", xs, {"x": 1}), make_location("b", xs, {"x": 1}),
                            make_location("c", xs, {"x": 1})),
                  (Edge("e1", "a", "b", Guard.of(Rect("x", Interval.point(1))), Reset.of({"x": 0})),
                   Edge("e2", "b", "c", Guard.of(Rect("x", Interval.point(0))), Reset.of({}))), "a")
    n = strict(h)
    merged = [e for e in n.automaton.edges if n.edge_map[e.name] == ("e1", "e2")]
    assert merged
    # x was reset by e1, so e2's atom x = 0 is discharged and only x = 1 remains
    assert all(e.guard == Guard.of(Rect("x", Interval.point(1))) for e in merged)


def test_strict_single_edges_mirror_input():
    xs = ("x",)
    h = Automaton("p", xs, (make_location("a", xs, {"x": 1}), make_location("b", xs, {"x": 1})),
                  (Edge("e", "a", "b", Guard.of(Rect("x", Interval.point(1))), Reset.of({"x": 0})),), "a")
    n = strict(h)
    assert {n.edge_map[e.name] for e in n.automaton.edges} == {("e",)}


def test_pipeline_fig1_h3_form():
    p = normalize_pipeline(fig1(), "l4", materialize=True)
    out = p.strict_automaton().automaton
    assert h3_violations(out) == []
    assert p.goal_set() and all(p.cb_to_source_loc(p.st.loc_map[g]) == "l4" for g in p.goal_set())


def _strict_form(r: random.Random) -> Automaton:
    xs = ("x", "y")
    unit = Guard.of(*[Rect(x, Interval.from_relation("<=", 1)) for x in xs])
    locs = [make_location(f"l{i}", xs, {x: r.randint(1, 3) for x in xs}, unit) for i in range(3)]
    edges = []
    for k in range(4):
        v = r.choice(xs)
        g = Guard.of(Rect(v, Interval.point(1))) if r.random() < 0.7 else TRUE
        edges.append(Edge(f"e{k}", f"l{r.randrange(3)}", f"l{r.randrange(3)}", g, Reset.of({v: 0})))
    return Automaton("h", xs, tuple(locs), tuple(edges), "l0")


def test_pipeline_property_holds_on_normalized_input():
    for seed in range(30):
        h = _strict_form(random.Random(seed))
        assert h3_violations(h) == []
        out = normalize_pipeline(h, "l2", materialize=True).strict_automaton().automaton
        assert h3_violations(out) == [], seed


def test_zero_rate_location_leaves_equality_to_zero():
    # renormalizing the Fig. 1 output: in l4 both rates are 0, so a guard y = 1 seen after a wrap of y
    # adapts to y = 0 and cannot be discharged
    out = normalize_pipeline(fig1(), "l4", materialize=True).strict_automaton().automaton
    again = normalize_pipeline(out, out.init, materialize=True).strict_automaton().automaton
    bad = h3_violations(again)
    assert bad
    assert all(again.loc(again.edge(n).src).rate("x") == Interval.point(0) or
               again.loc(again.edge(n).src).rate("y") == Interval.point(0) for n in bad)


def test_pipeline_rejects_diagonals():
    xs = ("x", "y")
    h = Automaton("d", xs, (make_location("a", xs),), (Edge("e", "a", "a", Guard.of(Diag("x", "y", "<", 1)),
                                                            Reset.of({})),), "a")
    with pytest.raises(OutOfClass):
        normalize_pipeline(h, "a")


def _with_sink(h: Automaton, goals) -> Automaton:
    sink = make_location("__sink", h.vars)
    extra = tuple(Edge(f"__to_sink{i}", g, "__sink", TRUE, Reset.of({})) for i, g in enumerate(sorted(goals)))
    return Automaton(h.name, h.vars, h.locations + (sink,), h.edges + extra, h.init)


def test_each_stage_preserves_bounded_reachability():
    checked = 0
    for seed in range(25):
        rng = random.Random(500 + seed)
        h = rha(rng, rng.randint(1, 2), rng.randint(1, 2), rng.randint(1, 3), cmax=2)
        goal = f"l{len(h.locations) - 1}"
        p = normalize_pipeline(h, goal)
        dr = p.dr.automaton
        cb = p.cb.automaton
        stages = [
            (dr, [l for l, s in p.dr.loc_map.items() if s == goal]),
            (cb, sorted(p.goal_cb_locs)),
        ]
        for T in (F(1, 2), F(1)):
            ref = oracle_reach(h, goal, T, max_depth=30)
            if ref is None:
                continue
            for out, goals in stages:
                got = oracle_reach(_with_sink(out, goals), "__sink", T, max_depth=40)
                if got is not None:
                    assert got == ref, (seed, T)
                    checked += 1
    assert checked >= 40


def test_cbound_invariants_bound_every_variable():
    h = cbound(dreset(fig1()).automaton).automaton
    for l in h.locations:
        if not l.invariant.is_false:
            for v in h.vars:
                assert Rect(v, Interval.from_relation("<=", 1)) in l.invariant.atoms


def test_cbound_sampled_runs_stay_below_one():
    from tbreach.reductions.simulate import drive
    h = cbound(dreset(fig1()).automaton).automaton
    rng = random.Random(3)
    for _ in range(20):
        run = drive(h, lambda s, steps, out: [rng.choice(out)] if out else [], lambda s, steps: len(steps) >= 12)
        assert run.is_variable_bounded(1)
