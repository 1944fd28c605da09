"""Diagonal-guard encoding with fixed positive rates.

Each machine counter ``c`` is the difference of two never-decremented auxiliary counters
``c_top - c_bot``. An auxiliary counter ``a`` holding ``v`` is stored as ``|x_a - y_a| = 1/2^v``
at round starts, with ``x_a, y_a`` at rate 1, ``z_a`` at rate 2 and ``w_a`` at rate 3 in every
location. A round either keeps the value (maintain, duration ``2/2^v``) or halves the
difference (increment, duration ``1/2^v``). One machine instruction lasts until all four
auxiliary counters sit at a round start together.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Optional

from ..core import Automaton, Diag, Edge, Guard, Interval, Rect, Reset, make_location
from .minsky import Inc, MinskyMachine
from .negrates import Compiled, trim

GOAL = "goal"
START = "start"
RATES = {"x": 1, "y": 1, "z": 2, "w": 3}


def aux_counters(m: MinskyMachine) -> tuple:
    return tuple(f"{c}_{side}" for c in m.counters for side in ("bot", "top"))


def _v(kind: str, a: str) -> str:
    return f"{kind}_{a}"


def _eq(a: str, u: str, v: str) -> Diag:
    return Diag(_v(u, a), _v(v, a), "==", Fraction(0))


def _zero_y(auxs) -> Guard:
    return Guard.of(*(Rect(_v("y", a), Interval.point(0)) for a in auxs))


def _designated(ins, br: str) -> Optional[str]:
    if br == "inc":
        return f"{ins.c}_top"
    if br == "dec":
        return f"{ins.c}_bot"
    return None


def compile_diagonal(m: MinskyMachine, init: Optional[int] = None) -> Compiled:
    """Compile ``m``; with ``init`` the auxiliary counters start at that value, else a loop guesses it."""
    auxs = aux_counters(m)
    xs = tuple(_v(k, a) for a in auxs for k in "xyzw")
    rates = {v: RATES[v[0]] for v in xs}

    def loc(name, inv=Guard.of()):
        return make_location(name, xs, rates, inv)

    def boundary(q: str) -> str:
        return GOAL if q == m.final else f"at.{q}"

    locs = [loc(START), loc(GOAL)]
    edges: list = []
    tags: dict = {}

    def edge(name, src, trg, guard, reset=(), tag=None):
        edges.append(Edge(name, src, trg, guard, Reset.of({v: 0 for v in reset} if not isinstance(reset, dict) else reset)))
        if tag is not None:
            tags[name] = tag

    for q in m.states:
        if q != m.final:
            locs.append(loc(boundary(q), _zero_y(auxs)))

    for ins in m.program:
        c = ins.c
        branches = ["inc"] if isinstance(ins, Inc) else ["zero", "dec"]
        for br in branches:
            dest = ins.q1 if br == "inc" else (ins.zero if br == "zero" else ins.nonzero)
            des = _designated(ins, br)

            def rname(phases, flag):
                return f"run.{ins.q}.{br}.{''.join(phases)}.{flag}"

            flags = ("todo", "done") if des else ("done",)
            for phases in product("SM", repeat=len(auxs)):
                for flag in flags:
                    locs.append(loc(rname(phases, flag)))
            first = rname("S" * len(auxs), flags[0])
            diff = Diag(f"x_{c}_bot", f"x_{c}_top", "==" if br == "zero" else ">", Fraction(0))
            edge(f"go.{ins.q}.{br}", boundary(ins.q), first, Guard.of() if br == "inc" else Guard.of(diff),
                 tag=("branch", ins.q, br))
            for phases in product("SM", repeat=len(auxs)):
                for flag in flags:
                    here = rname(phases, flag)
                    for i, a in enumerate(auxs):
                        nxt = list(phases)
                        if phases[i] == "S":
                            nxt[i] = "M"
                            if a == des and flag == "todo":
                                edge(f"inc.{a}.{here}", here, rname(nxt, "done"), Guard.of(_eq(a, "x", "w")),
                                     (_v("x", a), _v("z", a), _v("w", a)), ("start-half", a, "inc"))
                            else:
                                edge(f"keep.{a}.{here}", here, rname(nxt, flag), Guard.of(_eq(a, "x", "z")),
                                     (_v("x", a), _v("z", a)), ("start-half", a, "maintain"))
                        else:
                            nxt[i] = "S"
                            edge(f"back.{a}.{here}", here, rname(nxt, flag), Guard.of(_eq(a, "y", "z")),
                                 (_v("y", a), _v("z", a), _v("w", a)), ("round-end", a))
            edge(f"end.{ins.q}.{br}", rname("S" * len(auxs), "done"), boundary(dest), _zero_y(auxs),
                 tag=("end", ins.q, br))

    if init is None:
        one = {_v(k, a): (1 if k == "x" else 0) for a in auxs for k in "xyzw"}
        locs += [loc("init.S"), loc("init.M")]
        edge("entry", START, "init.S", Guard.of(), one, ("entry",))
        edge("init.inc", "init.S", "init.M", Guard.of(*(_eq(a, "x", "w") for a in auxs)),
             [_v(k, a) for a in auxs for k in "xzw"], ("init-inc",))
        edge("init.back", "init.M", "init.S", Guard.of(*(_eq(a, "y", "z") for a in auxs)),
             [_v(k, a) for a in auxs for k in "yzw"], ("init-back",))
        edge("init.done", "init.S", boundary(m.init), _zero_y(auxs), tag=("init-done",))
    else:
        start = {_v(k, a): (Fraction(1, 2 ** init) if k == "x" else 0) for a in auxs for k in "xyzw"}
        edge("entry", START, boundary(m.init), Guard.of(), start, ("entry",))
    h = trim(Automaton("diagonal", xs, tuple(locs), tuple(edges), START), keep=(GOAL,))
    names = {e.name for e in h.edges}
    return Compiled(h, GOAL, m, "diagonal", {e: t for e, t in tags.items() if e in names}, init)
