"""Reference reachability search used to cross-check the decision procedure.

Works on the automaton as given: polyhedra over the variables plus elapsed
time, one successor per edge, subsumption on revisits and a depth cap. It
shares only the linear-arithmetic layer with the main procedure.
"""
from __future__ import annotations

from typing import Optional

from .core import Automaton, Diag, Guard, Rect, frac
from .lra import LinearConstraint, LinearSystem, LinearTerm, contains, feasible, project, remove_redundant


def _cons(g: Guard, val) -> list:
    if g.is_false:
        return [LinearTerm.constant(1).le(0)]
    out = []
    for a in g.atoms:
        if isinstance(a, Diag):
            d = val(a.x) - val(a.y)
            out.append({"<": d.lt, "<=": d.le, "==": d.eq, ">=": d.ge, ">": d.gt}[a.rel](a.const))
            continue
        x, iv = val(a.var), a.interval
        if iv.lo is not None:
            out.append(x.ge(iv.lo) if iv.lo_closed else x.gt(iv.lo))
        if iv.hi is not None:
            out.append(x.le(iv.hi) if iv.hi_closed else x.lt(iv.hi))
    return out


def oracle_reach(h: Automaton, goal: str, T, max_depth: int = 40) -> Optional[bool]:
    """``True``/``False`` when the search is conclusive, ``None`` when the depth cap was hit."""
    T = frac(T)
    xs = list(h.vars)
    cur = {x: f"c.{x}" for x in xs} | {"": "c.E"}
    old = {x: f"p.{x}" for x in xs} | {"": "p.E"}
    keep = list(cur.values())
    var = LinearTerm.var

    start = LinearSystem.of([var(n).eq(0) for n in keep], keep)
    if h.init == goal:
        return True
    seen: dict = {}
    capped = False
    stack = [(h.init, start, 0)]
    while stack:
        loc, P, depth = stack.pop()
        if any(contains(Q, P) for Q in seen.get(loc, ())):
            continue
        seen.setdefault(loc, []).append(P)
        if depth >= max_depth:
            capped = True
            continue
        L = h.loc(loc)
        for e in h.out_edges(loc):
            ren = {cur[k]: old[k] for k in cur}
            cs = [LinearConstraint(LinearTerm.of({ren[u]: a for u, a in c.term.coeffs}, c.term.const), c.rel)
                  for c in P.constraints]
            t = var("t")
            cs.append(t.ge(0))
            end = {}
            for x in xs:
                iv = L.rate(x)
                if iv.is_singular():
                    end[x] = var(old[x]) + t.scale(iv.lo)
                    continue
                d = var(f"d.{x}")
                # closed hull of the rate set; open endpoints are handled below
                if iv.lo is not None:
                    cs.append((d - t.scale(iv.lo)).ge(0))
                if iv.hi is not None:
                    cs.append((d - t.scale(iv.hi)).le(0))
                end[x] = var(old[x]) + d
            cs += _cons(L.invariant, lambda x: var(old[x]))
            cs += _cons(L.invariant, lambda x: end[x])
            cs += _cons(e.guard, lambda x: end[x])
            cs.append((var(old[""]) + t).le(T))
            cs.append(var(cur[""]).eq(var(old[""]) + t))
            for x in xs:
                iv = e.reset.get(x)
                if iv is None:
                    cs.append(var(cur[x]).eq(end[x]))
                else:
                    cs += _cons(Guard.of(Rect(x, iv)), lambda _x: var(cur[x]))
            for sys in _variants(LinearSystem.of(cs), L, xs):
                proj = project(sys, keep)
                if not feasible(proj).sat:
                    continue
                if e.trg == goal:
                    return True
                stack.append((e.trg, remove_redundant(LinearSystem.of(proj.constraints, keep)), depth + 1))
    return None if capped else False


def _open_rates(L) -> bool:
    return any((iv.lo is not None and not iv.lo_closed) or (iv.hi is not None and not iv.hi_closed)
               for _, iv in L.rates)


def _variants(sys: LinearSystem, L, xs) -> list:
    """Exact successor systems: an open rate endpoint splits into a zero delay and a strict positive one."""
    if not _open_rates(L):
        return [sys]
    t = LinearTerm.var("t")
    strict = [t.gt(0)]
    for x in xs:
        iv = L.rate(x)
        if iv.is_singular():
            continue
        d = LinearTerm.var(f"d.{x}")
        if iv.lo is not None and not iv.lo_closed:
            strict.append((d - t.scale(iv.lo)).gt(0))
        if iv.hi is not None and not iv.hi_closed:
            strict.append((d - t.scale(iv.hi)).lt(0))
    return [sys.add(t.eq(0)), sys.add(*strict)]
