"""Deterministic earliest-event driver for singular automata.

At each location the driver computes, for every allowed outgoing edge, the
earliest delay at which its guard holds while the invariant stays true, and
fires the edge with the smallest delay (ties go to the first edge in the
order given by the chooser). The resulting timed path is replayed through the
core semantics, so every reported value is an exact semantic value.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

from ..core import Automaton, Diag, Guard, Interval, ModelError, Rect, Run, State, TimedStep, replay

INF = None


def _window(slope: Fraction, start: Fraction, iv: Interval) -> Optional[Interval]:
    """``{t >= 0 : start + slope * t in iv}`` as an interval, or ``None`` if empty."""
    if slope == 0:
        return Interval(Fraction(0), None, True, False) if iv.contains(start) else None
    lo_t = hi_t = None
    lo_c = hi_c = False
    # map each value bound to a time bound; a negative slope swaps the roles
    for bound, closed, is_lo in ((iv.lo, iv.lo_closed, True), (iv.hi, iv.hi_closed, False)):
        if bound is None:
            continue
        t = (bound - start) / slope
        if (slope > 0) == is_lo:
            if lo_t is None or t > lo_t or (t == lo_t and not closed):
                lo_t, lo_c = t, closed
        else:
            if hi_t is None or t < hi_t or (t == hi_t and not closed):
                hi_t, hi_c = t, closed
    if lo_t is None or lo_t < 0:
        lo_t, lo_c = Fraction(0), True
    w = Interval(lo_t, hi_t, lo_c, hi_c)
    return None if w.is_empty() else w


def _atom_window(a, val: dict, rate: dict) -> Optional[Interval]:
    if isinstance(a, Rect):
        return _window(rate[a.var], val[a.var], a.interval)
    slope = rate[a.x] - rate[a.y]
    start = val[a.x] - val[a.y]
    return _window(slope, start, Interval.from_relation(a.rel, a.const))


def guard_window(g: Guard, val: dict, rate: dict) -> Optional[Interval]:
    if g.is_false:
        return None
    w = Interval(Fraction(0), None, True, False)
    for a in g.atoms:
        aw = _atom_window(a, val, rate)
        if aw is None:
            return None
        w = w.intersect(aw)
        if w.is_empty():
            return None
    return w


def _rates(h: Automaton, loc) -> dict:
    rate = {}
    for x, iv in loc.rates:
        if not iv.is_singular():
            raise ModelError("the earliest-event driver needs singular rates")
        rate[x] = iv.lo
    return rate


def _earliest(g: Guard, inv: Optional[Interval], val: dict, rate: dict) -> Optional[Fraction]:
    if inv is None or not inv.contains(Fraction(0)):
        return None
    w = guard_window(g, val, rate)
    if w is None:
        return None
    w = inv.intersect(w)
    if w.is_empty() or not w.lo_closed:
        return None
    return w.lo


def earliest(h: Automaton, s: State, edge: str) -> Optional[Fraction]:
    """Smallest delay after which ``edge`` can fire from ``s`` without leaving the invariant."""
    loc = h.loc(s.loc)
    rate, val = _rates(h, loc), dict(s.valuation)
    return _earliest(h.edge(edge).guard, guard_window(loc.invariant, val, rate), val, rate)


Chooser = Callable[[State, list, list], list]


def drive(h: Automaton, choose: Chooser, stop: Callable[[State, list], bool], max_events: int = 100000) -> Run:
    """Fire edges until ``stop(state, steps)`` holds or no allowed edge can fire.

    ``choose(state, steps, out_edges)`` returns the allowed edge names in priority order.
    """
    s = State.initial(h)
    steps: list = []
    for _ in range(max_events):
        if stop(s, steps):
            break
        best = None
        loc = h.loc(s.loc)
        rate, val = _rates(h, loc), dict(s.valuation)
        inv = guard_window(loc.invariant, val, rate)
        for e in choose(s, steps, [e.name for e in h.out_edges(s.loc)]):
            t = _earliest(h.edge(e).guard, inv, val, rate)
            if t is not None and (best is None or t < best[0]):
                best = (t, e)
        if best is None:
            break
        step = TimedStep(best[0], best[1])
        s = replay(h, s, (step,)).last
        steps.append(step)
    return replay(h, State.initial(h), steps)
