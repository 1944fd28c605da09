"""Negative-rate encoding: a singular RHA whose timed behaviour follows a two-counter machine.

Counter ``c`` after ``i`` machine steps with value ``v`` is stored as ``x_c = 1/4^(i+v)`` at
tick time ``t_i = 1 - 1/4^i``. The tick clock ``x_t`` runs a division-by-4 gadget in a loop;
every machine instruction is a product of per-counter division gadgets started on a tick.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..core import Automaton, Edge, Guard, Interval, Rect, Reset, make_location
from .minsky import Inc, MinskyMachine

GOAL = "goal"
START = "start"

_NONNEG = Interval(Fraction(0), None, True, False)


def _zero(v: str) -> Rect:
    return Rect(v, Interval.point(0))


def _nonneg(v: str) -> Rect:
    return Rect(v, _NONNEG)


def division_rates(phase: str, k: int) -> tuple:
    """Rates of ``(x, y)`` in a division-by-k^2 gadget: ``A`` drains x, ``B`` drains y, ``D`` idles."""
    return {"A": (-k, 1), "B": (1, -k), "D": (0, 0)}[phase]


def division_gadget(k: int) -> Automaton:
    """The bare gadget: ``in -> A -> B -> out`` dividing ``x`` by ``k^2``."""
    xs = ("x", "y")
    locs = (
        make_location("in", xs),
        make_location("A", xs, dict(zip(xs, division_rates("A", k))), Guard.of(_nonneg("x"))),
        make_location("B", xs, dict(zip(xs, division_rates("B", k))), Guard.of(_nonneg("y"))),
        make_location("out", xs),
    )
    edges = (
        Edge("enter", "in", "A", Guard.of(_zero("y")), Reset.of({})),
        Edge("half", "A", "B", Guard.of(_zero("x")), Reset.of({})),
        Edge("leave", "B", "out", Guard.of(_zero("y")), Reset.of({})),
    )
    return Automaton(f"div{k * k}", xs, locs, edges, "in")


@dataclass
class Compiled:
    """A compiled machine plus the edge tags the co-simulator uses to follow the canonical run."""

    automaton: Automaton
    goal: str
    machine: MinskyMachine
    target: str
    tags: dict = field(default_factory=dict)
    init: int | None = None


def _divisors(ins, branch: str, m: MinskyMachine) -> dict:
    """Per counter: ``(k, zero_test)``; ``k = 1`` means the counter is left untouched."""
    out = {}
    for c in m.counters:
        if c != ins.c:
            out[c] = (2, False)
        elif branch == "inc":
            out[c] = (4, False)
        elif branch == "zero":
            out[c] = (2, True)
        else:
            out[c] = (1, False)
    return out


def compile_negrates(m: MinskyMachine) -> Compiled:
    c, d = m.counters
    xs = ("x_t", "y_t", f"x_{c}", f"y_{c}", f"x_{d}", f"y_{d}")
    tick_rates = {"A": {"x_t": -2, "y_t": 1}, "B": {"x_t": 1, "y_t": -2}}
    tick_inv = {"A": _nonneg("x_t"), "B": _nonneg("y_t")}
    locs = [make_location(START, xs), make_location(GOAL, xs)]
    edges: list = []
    tags: dict = {}

    def machine_loc(tp: str, q: str) -> str:
        return f"{tp}.{q}"

    def target(tp: str, q: str) -> str:
        return GOAL if q == m.final else machine_loc(tp, q)

    for q in m.states:
        if q == m.final:
            continue
        for tp in "AB":
            locs.append(make_location(machine_loc(tp, q), xs, tick_rates[tp], Guard.of(tick_inv[tp])))
        edges.append(Edge(f"half.{q}", machine_loc("A", q), machine_loc("B", q), Guard.of(_zero("x_t")), Reset.of({})))

    for ins in m.program:
        branches = ["inc"] if isinstance(ins, Inc) else ["zero", "dec"]
        for br in branches:
            dest = ins.q1 if br == "inc" else (ins.zero if br == "zero" else ins.nonzero)
            div = _divisors(ins, br, m)
            start = {ctr: ("A" if k > 1 else "D") for ctr, (k, _) in div.items()}
            phases = [(pc, pd) for pc in "ABD" for pd in "ABD"]

            def gname(tp, pc, pd):
                return f"{tp}.{ins.q}.{br}.{pc}{pd}"

            for tp in "AB":
                for pc, pd in phases:
                    rates = dict(tick_rates[tp])
                    inv = [tick_inv[tp]]
                    for ctr, ph in ((c, pc), (d, pd)):
                        k = div[ctr][0]
                        rx, ry = division_rates(ph, k)
                        rates[f"x_{ctr}"], rates[f"y_{ctr}"] = rx, ry
                        if ph == "A":
                            inv.append(_nonneg(f"x_{ctr}"))
                        elif ph == "B":
                            inv.append(_nonneg(f"y_{ctr}"))
                    locs.append(make_location(gname(tp, pc, pd), xs, rates, Guard.of(*inv)))
            for pc, pd in phases:
                edges.append(Edge(f"half.{ins.q}.{br}.{pc}{pd}", gname("A", pc, pd), gname("B", pc, pd),
                                  Guard.of(_zero("x_t")), Reset.of({})))
            # the instruction starts on a tick
            edges.append(Edge(f"tick.{ins.q}.{br}", machine_loc("B", ins.q), gname("A", start[c], start[d]),
                              Guard.of(_zero("y_t")), Reset.of({})))
            tags[f"tick.{ins.q}.{br}"] = ("tick", ins.q, br)
            for tp in "AB":
                for pc, pd in phases:
                    here = gname(tp, pc, pd)
                    for idx, (ctr, ph) in enumerate(((c, pc), (d, pd))):
                        nxt = {"A": "B", "B": "D"}.get(ph)
                        if nxt is None or div[ctr][0] == 1:
                            continue
                        if ph == "A":
                            g = [_zero(f"x_{ctr}")]
                            if div[ctr][1]:
                                g.append(_zero("x_t"))
                        else:
                            g = [_zero(f"y_{ctr}")]
                        new = (nxt, pd) if idx == 0 else (pc, nxt)
                        edges.append(Edge(f"{ctr}{ph}{nxt}.{tp}.{ins.q}.{br}.{pc}{pd}", here, gname(tp, *new),
                                          Guard.of(*g), Reset.of({})))
                edges.append(Edge(f"done.{tp}.{ins.q}.{br}", gname(tp, "D", "D"), target(tp, dest),
                                  Guard.of(), Reset.of({})))

    entry_dest = target("B", m.init)
    edges.append(Edge("entry", START, entry_dest, Guard.of(),
                      Reset.of({"x_t": 1, f"x_{c}": 1, f"x_{d}": 1})))
    h = trim(Automaton("negrates", xs, tuple(locs), tuple(edges), START), keep=(GOAL,))
    names = {e.name for e in h.edges}
    return Compiled(h, GOAL, m, "negrates", {e: t for e, t in tags.items() if e in names})


def trim(h: Automaton, keep=()) -> Automaton:
    """Restrict to the locations reachable in the graph from the initial one (plus ``keep``)."""
    seen = {h.init}
    todo = [h.init]
    while todo:
        for e in h.out_edges(todo.pop()):
            if e.trg not in seen:
                seen.add(e.trg)
                todo.append(e.trg)
    seen |= set(keep)
    return Automaton(h.name, h.vars, tuple(l for l in h.locations if l.name in seen),
                     tuple(e for e in h.edges if e.src in seen), h.init)
