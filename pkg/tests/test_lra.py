import random
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from gen import enumeration_feasible, linear_system
from tbreach.lra import (LinearConstraint, LinearSystem, LinearTerm, check_witness, contains, eliminate,
                         feasible, project, remove_redundant)

x, y = LinearTerm.var("x"), LinearTerm.var("y")


def system(*cs, unknowns=()):
    return LinearSystem.of(cs, unknowns)


def test_feasible_with_strict_inequality():
    s = system(x.ge(0), x.le(1), (y - x).gt(0), y.le(1))
    res = feasible(s)
    assert res.sat and check_witness(s, res.witness)


def test_infeasible_bounds():
    assert not feasible(system(x.ge(1), x.le(0))).sat


def test_empty_system_is_sat():
    res = feasible(system())
    assert res.sat and res.witness == {}


def test_eliminate_examples():
    assert feasible(system(x.gt(1))).sat
    out = eliminate(system(y.ge(x), y.le(1)), "y")
    assert "y" not in out.unknowns
    assert check_witness(out, {"x": F(1)}) and not check_witness(out, {"x": F(2)})
    assert not feasible(eliminate(system(y.gt(x), y.lt(x)), "y")).sat
    out = eliminate(system(y.eq(x + 1), y.le(3)), "y")
    assert check_witness(out, {"x": F(2)}) and not check_witness(out, {"x": F(5, 2)})


def test_check_witness_examples():
    assert check_witness(system(x.le(1)), {"x": F(1)})
    assert not check_witness(system(x.lt(1)), {"x": F(1)})
    assert check_witness(system(x.eq(y.scale(2))), {"x": F(1), "y": F(1, 2)})


def test_strict_chain_is_infeasible():
    z = LinearTerm.var("z")
    assert not feasible(system(x.lt(y), y.lt(z), z.le(x))).sat


def test_project_and_contains():
    s = system(x.ge(0), y.ge(x), y.le(1))
    p = project(s, ["x"])
    assert contains(system(x.ge(0), x.le(1)), p) and contains(p, system(x.ge(0), x.le(1)))
    assert not contains(system(x.lt(1)), p)


def test_remove_redundant_keeps_solutions():
    s = system(x.le(1), x.le(2), x.ge(0), x.gt(-1))
    r = remove_redundant(s)
    assert len(r) <= 2 and contains(r, s) and contains(s, r)


def test_agrees_with_enumeration():
    for seed in range(300):
        s = linear_system(random.Random(seed), 2, 5)
        assert feasible(s).sat == enumeration_feasible(s), seed


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_eliminate_preserves_satisfiability(seed):
    s = linear_system(random.Random(seed), 3, 5)
    res = feasible(s)
    if res.sat:
        assert check_witness(s, res.witness)
    for u in s.unknowns:
        assert feasible(eliminate(s, u)).sat == res.sat


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_split_equalities_same_verdict(seed):
    s = linear_system(random.Random(seed), 3, 5)
    split = []
    for c in s.constraints:
        split.extend([c.term.le(0), c.term.ge(0)] if c.rel == "==" else [c])
    assert feasible(LinearSystem.of(split, s.unknowns)).sat == feasible(s).sat
