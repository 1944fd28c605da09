"""Built-in example models."""
from __future__ import annotations

from .core import Automaton, Edge
from .dsl import parse_model

FIG1 = """\
automaton fig1;
var x, y;
init l0;
loc l0 { rate x = 5; rate y = 2; inv x <= 1 && y <= 1; }
loc l1 { rate x = 2; rate y = 5; inv x <= 1 && y <= 1; }
loc l2 { rate x = 1; rate y = 17; inv x <= 1 && y <= 1; }
loc l3 { rate x = 10; rate y = 7; inv x <= 1 && y <= 1; }
loc l4 { rate x = 0; rate y = 0; inv x <= 1 && y <= 1; }
edge e01: l0 -> l1 { guard x == 1; reset x := 0; }
edge e10: l1 -> l0 { guard y == 1; reset y := 0; }
edge e02: l0 -> l2 { guard x == 1; reset x := 0; }
edge e03: l0 -> l3 { guard x == 1; reset x := 0; }
edge e22: l2 -> l2 { guard y <= 1; reset y := 0; }
edge e24: l2 -> l4 { guard x == 3; reset x := 0; }
edge e34: l3 -> l4 { guard x == 1; reset x := 0; }
"""


def fig1() -> Automaton:
    return parse_model(FIG1)


def without_edge(h: Automaton, name: str) -> Automaton:
    h.edge(name)
    return Automaton(h.name, h.vars, h.locations, tuple(e for e in h.edges if e.name != name), h.init)


def with_edges(h: Automaton, edges) -> Automaton:
    return Automaton(h.name, h.vars, h.locations, tuple(h.edges) + tuple(edges), h.init)


__all__ = ["FIG1", "fig1", "without_edge", "with_edges", "Edge"]
