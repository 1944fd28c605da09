import random
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from gen import any_automaton
from tbreach.core import Interval, classify
from tbreach.dsl import ParseError, parse_model, print_model, tokenize
from tbreach.jsonio import automaton_from_json, automaton_to_json, path_from_json, path_to_json, q
from tbreach.core import State, replay, timed_path
from tbreach.models import FIG1, fig1
from tbreach.normalize import normalize_pipeline

MODELS = Path(__file__).resolve().parent.parent / "models"


def test_fig1_file_matches_builtin():
    h = parse_model((MODELS / "fig1.ha").read_text())
    assert h == fig1()
    assert len(h.locations) == 5 and len(h.edges) == 7
    c = classify(h)
    assert c.singular and c.diagonal_free and c.multirate


def test_empty_variable_list():
    h = parse_model("automaton a; init l; loc l { }")
    assert h.vars == () and parse_model(print_model(h)) == h


def test_missing_constant_diagnostic():
    src = "automaton c;\nvar x;\ninit l;\nloc l { }\nedge e: l -> l { guard x == ; }\n"
    with pytest.raises(ParseError) as err:
        parse_model(src)
    d = err.value.diagnostics[0]
    assert (d.line, d.column) == (5, 29)
    assert "number" in d.message


def test_unknown_names_are_reported():
    with pytest.raises(ParseError, match="unknown"):
        parse_model("automaton c; var x; init l; loc l { rate y = 1; }")
    with pytest.raises(ParseError):
        parse_model("automaton c; var x; init nowhere; loc l { }")


def test_round_trips():
    assert parse_model(print_model(fig1())) == fig1()
    out = normalize_pipeline(fig1(), "l4", materialize=True).strict_automaton().automaton
    assert parse_model(print_model(out)) == out


def test_infinite_bounds_round_trip():
    src = "automaton b; var x; init l; loc l { rate x in (-inf, 3]; inv x in [0, inf); }"
    h = parse_model(src)
    assert h.loc("l").rate("x") == Interval(None, F(3), False, True)
    text = print_model(h)
    assert "(-inf, 3]" in text
    assert parse_model(text) == h


def test_printing_is_canonical():
    assert print_model(parse_model(print_model(fig1()))) == print_model(fig1())
    assert parse_model(FIG1) == fig1()


def test_comments_and_quoted_names():
    h = parse_model('// c\nautomaton "my model"; var x; init "a b"; # note\nloc "a b" { rate x = 1/2; }')
    assert h.name == "my model" and h.init == "a b"
    assert parse_model(print_model(h)) == h


def test_tokenize_positions():
    toks = tokenize("automaton a;\n  var x;")
    assert [(t.text, t.line, t.col) for t in toks if t.kind != "eof"][-3:] == [("var", 2, 3), ("x", 2, 7), (";", 2, 8)]


def test_json_forms():
    h = fig1()
    assert automaton_from_json(automaton_to_json(h)) == h
    p = timed_path([("1/5", "e01"), ("3/25", "e10")])
    back = path_from_json(path_to_json(h, p))
    assert [(s.delay, s.edge) for s in back] == [(s.delay, s.edge) for s in p]
    assert replay(h, State.initial(h), back).states == replay(h, State.initial(h), p).states
    assert q(F(5)) == "5/1" and q(F(-3, 6)) == "-1/2"


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_fuzz_round_trip(seed):
    h = any_automaton(random.Random(seed))
    assert parse_model(print_model(h)) == h


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=";{}()[],=<>-+xyl0123/ \n#&|:abeinvrt", max_size=80))
def test_garbage_gives_positioned_diagnostics(text):
    try:
        parse_model(text)
    except ParseError as err:
        assert err.diagnostics
        assert all(d.line >= 1 and d.column >= 1 for d in err.diagnostics)
