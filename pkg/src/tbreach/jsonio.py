"""JSON forms of automata, states, timed paths and runs (rationals as ``"num/den"`` strings)."""
from __future__ import annotations

from fractions import Fraction

from .core import (FALSE, Automaton, Diag, Edge, Guard, Interval, Location, Rect, Reset, Run, State,
                   TimedStep, frac, step_rates)


def q(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def unq(s) -> Fraction:
    return frac(s) if isinstance(s, (str, int, Fraction)) else frac(str(s))


def interval_to_json(iv: Interval) -> dict:
    return {"lo": None if iv.lo is None else q(iv.lo), "hi": None if iv.hi is None else q(iv.hi),
            "lo_closed": iv.lo_closed, "hi_closed": iv.hi_closed}


def interval_from_json(d: dict) -> Interval:
    return Interval(None if d["lo"] is None else unq(d["lo"]), None if d["hi"] is None else unq(d["hi"]),
                    d["lo_closed"], d["hi_closed"])


def guard_to_json(g: Guard):
    if g.is_false:
        return False
    out = []
    for a in g.atoms:
        if isinstance(a, Rect):
            out.append({"rect": a.var, "interval": interval_to_json(a.interval)})
        else:
            out.append({"diag": [a.x, a.y], "rel": a.rel, "const": q(a.const)})
    return out


def guard_from_json(d) -> Guard:
    if d is False:
        return FALSE
    atoms = []
    for a in d:
        if "rect" in a:
            atoms.append(Rect(a["rect"], interval_from_json(a["interval"])))
        else:
            atoms.append(Diag(a["diag"][0], a["diag"][1], a["rel"], unq(a["const"])))
    return Guard.of(atoms)


def automaton_to_json(h: Automaton) -> dict:
    return {
        "name": h.name,
        "vars": list(h.vars),
        "init": h.init,
        "locations": [{"name": l.name, "rates": {v: interval_to_json(iv) for v, iv in l.rates},
                       "invariant": guard_to_json(l.invariant)} for l in h.locations],
        "edges": [{"name": e.name, "src": e.src, "trg": e.trg, "guard": guard_to_json(e.guard),
                   "reset": {v: interval_to_json(iv) for v, iv in e.reset.entries}} for e in h.edges],
    }


def automaton_from_json(d: dict) -> Automaton:
    locs = tuple(Location(l["name"], tuple((v, interval_from_json(l["rates"][v])) for v in d["vars"]),
                          guard_from_json(l["invariant"])) for l in d["locations"])
    edges = tuple(Edge(e["name"], e["src"], e["trg"], guard_from_json(e["guard"]),
                       Reset(tuple((v, interval_from_json(iv)) for v, iv in e["reset"].items())))
                  for e in d["edges"])
    return Automaton(d["name"], tuple(d["vars"]), locs, edges, d["init"])


def state_to_json(s: State) -> dict:
    return {"loc": s.loc, "valuation": {k: q(v) for k, v in s.valuation.items()}}


def state_from_json(d: dict) -> State:
    return State.of(d["loc"], {k: unq(v) for k, v in d["valuation"].items()})


def path_to_json(h: Automaton, path) -> list:
    out = []
    for st in path:
        item = {"delay": q(st.delay), "rates": {k: q(v) for k, v in step_rates(h, st).items()}, "edge": st.edge}
        if st.resets:
            item["resets"] = {k: q(v) for k, v in st.resets.items()}
        out.append(item)
    return out


def path_from_json(items) -> tuple:
    steps = []
    for it in items:
        if isinstance(it, (list, tuple)):
            steps.append(TimedStep(unq(it[0]), it[1]))
            continue
        rates = it.get("rates")
        resets = it.get("resets")
        steps.append(TimedStep(unq(it["delay"]), it["edge"],
                               None if rates is None else {k: unq(v) for k, v in rates.items()},
                               None if resets is None else {k: unq(v) for k, v in resets.items()}))
    return tuple(steps)


def run_to_json(run: Run) -> dict:
    """``{"initial": state, "steps": [{delay, rates, edge, post_state}, ...], "duration"}``."""
    steps = []
    h = run.automaton
    for st, post in zip(run.steps, run.states[1:]):
        item = {"delay": q(st.delay), "rates": {k: q(v) for k, v in step_rates(h, st).items()},
                "edge": st.edge, "post_state": state_to_json(post)}
        if st.resets:
            item["resets"] = {k: q(v) for k, v in st.resets.items()}
        steps.append(item)
    return {"initial": state_to_json(run.first), "steps": steps, "duration": q(run.duration)}
