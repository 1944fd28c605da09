"""Normal form: deterministic resets, variables bounded by 1, strictly elapsing time.

Each construction returns a :class:`Normalized` record holding the new
automaton together with back-maps for locations and edges, so that runs found
downstream can be replayed in the source automaton.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .core import (FALSE, TRUE, Automaton, Diag, Edge, Guard, Interval, Location, ModelError, Rect,
                   Reset, classify)

ZERO_IV = Interval.point(0)
UNIT = Interval(Fraction(0), Fraction(1))
NONNEG = Interval(Fraction(0), None, True, False)


class OutOfClass(ModelError):
    """The automaton lies outside the class handled by the decision procedure."""


@dataclass
class Normalized:
    automaton: Automaton
    loc_map: dict   # new location -> source location
    edge_map: dict  # new edge -> source edge name, None (fresh edge) or tuple of source edges (bursts)
    extra: dict = field(default_factory=dict)


def reduce_guard(g: Guard) -> Guard:
    return Guard.of(g)


def _require_rect(g: Guard):
    for a in g.atoms:
        if isinstance(a, Diag):
            raise OutOfClass("diagonal constraint present")


# --------------------------------------------------------------------------- deterministic resets


def adapt_reset(g: Guard, rho: Mapping[str, Interval]) -> Guard:
    """Shift every rectangular atom by the interval its variable was last reset into."""
    if g.is_false:
        return FALSE
    _require_rect(g)
    return Guard.of(Rect(a.var, a.interval.minus(rho.get(a.var, ZERO_IV))) for a in g.atoms)


def _rho_name(vars_, rho: tuple) -> str:
    parts = [f"{v}{iv}" for v, iv in zip(vars_, rho) if iv != ZERO_IV]
    return "{" + ",".join(parts) + "}"


def dreset(h: Automaton) -> Normalized:
    for l in h.locations:
        _require_rect(l.invariant)
    start = (h.init, tuple(ZERO_IV for _ in h.vars))
    names = {start: f"{h.init}{_rho_name(h.vars, start[1])}"}
    queue = deque([start])
    locs, edges, loc_map, edge_map = [], [], {}, {}
    while queue:
        key = queue.popleft()
        loc_name, rho = key
        src = h.loc(loc_name)
        rho_d = dict(zip(h.vars, rho))
        locs.append(Location(names[key], src.rates, adapt_reset(src.invariant, rho_d)))
        loc_map[names[key]] = loc_name
        for e in h.out_edges(loc_name):
            _require_rect(e.guard)
            g = adapt_reset(e.guard, rho_d)
            if g.is_false:
                continue
            nxt = list(rho)
            for i, v in enumerate(h.vars):
                iv = e.reset.get(v)
                if iv is not None:
                    nxt[i] = iv
            tkey = (e.trg, tuple(nxt))
            if tkey not in names:
                names[tkey] = f"{e.trg}{_rho_name(h.vars, tkey[1])}"
                queue.append(tkey)
            ename = f"{e.name}@{names[key]}"
            edges.append(Edge(ename, names[key], names[tkey], g, Reset.of({v: 0 for v in e.reset.vars})))
            edge_map[ename] = e.name
    return Normalized(Automaton(h.name, h.vars, tuple(locs), tuple(edges), names[start]), loc_map, edge_map)


# --------------------------------------------------------------------------- integer parts


def _split(a: Rect) -> list:
    """Interval atom -> atoms of the forms x<=k, x<k, x=k, x>=k, x>k."""
    iv = a.interval
    if iv.is_singular():
        return [("==", iv.lo)]
    out = []
    if iv.lo is not None:
        out.append((">=" if iv.lo_closed else ">", iv.lo))
    if iv.hi is not None:
        out.append(("<=" if iv.hi_closed else "<", iv.hi))
    return out


def _adapt_atom(x: str, rel: str, k: Fraction, i: int):
    if k.denominator != 1:
        raise OutOfClass(f"non-integer constant {k} on {x}")
    k = int(k)
    eq0 = Rect(x, Interval.point(0))
    eq1 = Rect(x, Interval.point(1))
    if rel == "<=":
        return FALSE if k < i else eq0 if k == i else TRUE
    if rel == "<":
        return FALSE if k <= i else Rect(x, Interval.from_relation("<", 1)) if k == i + 1 else TRUE
    if rel == "==":
        return eq0 if k == i else FALSE
    if rel == ">=":
        return FALSE if k > i + 1 else eq1 if k == i + 1 else TRUE
    return TRUE if k < i else Rect(x, Interval.from_relation(">", 0)) if k == i else FALSE


def adapt_int(g: Guard, i: Mapping[str, int]) -> Guard:
    if g.is_false:
        return FALSE
    _require_rect(g)
    parts = []
    for a in g.atoms:
        for rel, k in _split(a):
            parts.append(_adapt_atom(a.var, rel, k, i[a.var]))
    return Guard.of(parts)


def _check_cbound_input(h: Automaton):
    for e in h.edges:
        for v, iv in e.reset.entries:
            if iv != ZERO_IV:
                raise ModelError(f"edge {e.name!r} resets {v} to {iv}; resets must be to 0")
    for l in h.locations:
        for v, iv in l.rates:
            if iv.lo is None or iv.lo < 0:
                raise OutOfClass(f"negative rate for {v} in {l.name!r}")


def cbound(h: Automaton, cap: Optional[int] = None) -> Normalized:
    """Integer parts move into the location; variables keep the fractional part.

    ``cap`` is the saturation value for integer parts (default ``cmax + 1``).
    """
    _check_cbound_input(h)
    cmax = h.cmax
    if cmax.denominator != 1:
        raise OutOfClass("non-integer constant")
    cap = int(cmax) + 1 if cap is None else cap
    unit = Guard.of(Rect(v, Interval.from_relation("<=", 1)) for v in h.vars)

    def name(loc, ivec):
        return f"{loc}[{','.join(map(str, ivec))}]" if h.vars else f"{loc}[]"

    start = (h.init, tuple(0 for _ in h.vars))
    seen = {start}
    queue = deque([start])
    locs, edges, loc_map, edge_map = [], [], {}, {}
    while queue:
        key = queue.popleft()
        lname, ivec = key
        src = h.loc(lname)
        i_d = dict(zip(h.vars, ivec))
        nm = name(lname, ivec)
        locs.append(Location(nm, src.rates, Guard.of(adapt_int(src.invariant, i_d), unit)))
        loc_map[nm] = lname
        targets = []
        for e in h.out_edges(lname):
            g = adapt_int(e.guard, i_d)
            if g.is_false:
                continue
            reset = set(e.reset.vars)
            nvec = tuple(0 if v in reset else ivec[j] for j, v in enumerate(h.vars))
            ename = f"{e.name}@{nm}"
            targets.append((Edge(ename, nm, name(e.trg, nvec), g, e.reset), (e.trg, nvec)))
            edge_map[ename] = e.name
        for j, v in enumerate(h.vars):
            nvec = tuple(min(ivec[j] + 1, cap) if m == j else ivec[m] for m in range(len(ivec)))
            ename = f"wrap.{v}@{nm}"
            targets.append((Edge(ename, nm, name(lname, nvec), Guard.of(Rect(v, Interval.point(1))),
                                 Reset.of({v: 0})), (lname, nvec)))
            edge_map[ename] = None
        for edge, tkey in targets:
            edges.append(edge)
            if tkey not in seen:
                seen.add(tkey)
                queue.append(tkey)
    out = Automaton(h.name, h.vars, tuple(locs), tuple(edges), name(*start))
    return Normalized(out, loc_map, edge_map, {"cap": cap})


# --------------------------------------------------------------------------- strictly elapsing time


def _domain(h: Automaton) -> dict:
    """Per-variable range known to hold at every reachable state: [0,1] or [0,inf)."""
    out = {}
    for v in h.vars:
        bounded = all(any(isinstance(a, Rect) and a.var == v and a.interval.hi is not None
                          and a.interval.hi <= 1 for a in l.invariant.atoms)
                      for l in h.locations if not l.invariant.is_false)
        out[v] = UNIT if bounded and h.locations else NONNEG
    return out


def _simplify_atom(a: Rect, dom: Interval):
    iv = a.interval.intersect(dom)
    if iv.is_empty():
        return FALSE
    if iv == dom:
        return TRUE
    if iv.is_singular():
        return Rect(a.var, iv)
    lo_same = iv.lo == dom.lo and iv.lo_closed == dom.lo_closed
    hi_same = iv.hi == dom.hi and iv.hi_closed == dom.hi_closed
    if lo_same:
        return Rect(a.var, Interval(None, iv.hi, False, iv.hi_closed))
    if hi_same:
        return Rect(a.var, Interval(iv.lo, None, iv.lo_closed, False))
    return Rect(a.var, iv)


def _substitute(g: Guard, zeroed: frozenset, dom: dict):
    """Evaluate atoms on zeroed variables at 0 and simplify the rest; ``None`` if false."""
    if g.is_false:
        return None
    out = []
    for a in g.atoms:
        if isinstance(a, Diag):
            raise OutOfClass("diagonal constraint present")
        if a.var in zeroed:
            if not a.interval.contains(Fraction(0)):
                return None
            continue
        s = _simplify_atom(a, dom[a.var])
        if s is FALSE:
            return None
        if s is not TRUE:
            out.append(s)
    return out


def _upper_lower(a: Rect, dom: Interval):
    """Split into an upper-bound and a lower-bound atom, dropping parts implied by the domain."""
    iv = a.interval
    parts = []
    for piece in (Interval(None, iv.hi, False, iv.hi_closed), Interval(iv.lo, None, iv.lo_closed, False)):
        if piece.is_full():
            parts.append(None)
            continue
        s = _simplify_atom(Rect(a.var, piece), dom)
        parts.append(None if s is TRUE else s)
    return parts[0], parts[1]


def _atoms_satisfiable(atoms, dom: dict) -> bool:
    acc: dict = {}
    for a in atoms:
        cur = acc.get(a.var, dom[a.var])
        cur = cur.intersect(a.interval)
        if cur.is_empty():
            return False
        acc[a.var] = cur
    return True


@dataclass(frozen=True)
class Burst:
    """A zero-time path compressed into one edge."""

    src: str
    trg: str
    edges: tuple     # source edge names
    guard: Guard     # evaluated on the valuation at the burst instant
    inv: Guard       # upper-bound parts of intermediate invariants
    reset: frozenset

    def signature(self):
        return self.trg, self.guard, self.inv, self.reset


class StrictView:
    """Burst table of an automaton with resets to 0, built on demand per location."""

    def __init__(self, h: Automaton):
        for e in h.edges:
            for v, iv in e.reset.entries:
                if iv != ZERO_IV:
                    raise ModelError(f"edge {e.name!r} resets {v} to {iv}; resets must be to 0")
        self.h = h
        self.dom = _domain(h)
        self._bursts: dict = {}

    def bursts(self, loc: str) -> tuple:
        if loc not in self._bursts:
            self._bursts[loc] = self._enumerate(loc)
        return self._bursts[loc]

    def _enumerate(self, loc: str) -> tuple:
        h, dom = self.h, self.dom
        out, seen = [], set()

        def extend(cur, path, zeroed, visits, guard, inv):
            for e in h.out_edges(cur):
                g_atoms = _substitute(e.guard, zeroed, dom)
                if g_atoms is None:
                    continue
                nz = zeroed | frozenset(e.reset.vars)
                # a revisit without new zeroed variables repeats a valuation: cut it
                prev = visits.get(e.trg)
                if prev is not None and nz <= prev:
                    continue
                guard2 = guard + [a for a in g_atoms if a not in guard]
                if not _atoms_satisfiable(guard2, dom):
                    continue
                b = Burst(loc, e.trg, path + (e.name,), Guard.of(guard2), Guard.of(inv), nz)
                if b.signature() not in seen:
                    seen.add(b.signature())
                    out.append(b)
                # continuing through e.trg: its invariant must hold at this instant
                inv_atoms = _substitute(h.loc(e.trg).invariant, nz, dom)
                if inv_atoms is None:
                    continue
                g3, inv3 = list(guard2), list(inv)
                for a in inv_atoms:
                    up, lo = _upper_lower(a, dom[a.var])
                    if lo is not None and lo not in g3:
                        g3.append(lo)
                    if up is not None and up not in inv3:
                        inv3.append(up)
                if not _atoms_satisfiable(g3 + inv3, dom):
                    continue
                v2 = dict(visits)
                v2[e.trg] = nz
                extend(e.trg, path + (e.name,), nz, v2, g3, inv3)

        extend(loc, (), frozenset(), {loc: frozenset()}, [], [])
        return tuple(out)

    def blocked(self, loc: str, extra: Guard = TRUE) -> bool:
        """True if no positive delay is possible in ``loc`` under its invariant plus ``extra``."""
        l = self.h.loc(loc)
        g = Guard.of(l.invariant, extra)
        if g.is_false:
            return True
        for a in g.atoms:
            if isinstance(a, Rect):
                iv = a.interval.intersect(self.dom[a.var])
                if iv.is_empty():
                    return True
                r = l.rate(a.var)
                if iv.is_singular() and not r.contains(Fraction(0)):
                    return True
        return False


def strict(h: Automaton, view: Optional[StrictView] = None) -> Normalized:
    """Materialize the strict-time automaton reachable from a fresh initial location."""
    view = view or StrictView(h)
    init_name = f"{h.init}#init"
    loc_map, edge_map = {init_name: h.init}, {}
    locs, edges = [], []
    index: dict = {}

    def lname(loc, k):
        return f"{loc}#end" if k is None else f"{loc}#{k}"

    def targets(loc):
        return [lname(loc, k) for k in range(len(view.bursts(loc)))] + [lname(loc, None)]

    queue = deque()
    src_init = h.loc(h.init)
    locs.append(Location(init_name, src_init.rates, src_init.invariant))
    for k, b in enumerate(view.bursts(h.init)):
        g = Guard.of(b.guard, b.inv)
        for t in targets(b.trg):
            ename = f"b{k}:{init_name}->{t}"
            edges.append(Edge(ename, init_name, t, g, Reset.of({v: 0 for v in sorted(b.reset)})))
            edge_map[ename] = b.edges
            if t not in index:
                index[t] = None
                queue.append(t)
    while queue:
        nm = queue.popleft()
        base, _, tag = nm.rpartition("#")
        src = h.loc(base)
        loc_map[nm] = base
        if tag == "end":
            locs.append(Location(nm, src.rates, src.invariant))
            continue
        b = view.bursts(base)[int(tag)]
        locs.append(Location(nm, src.rates, Guard.of(src.invariant, b.inv)))
        if view.blocked(base, b.inv):
            continue
        for t in targets(b.trg):
            ename = f"b{tag}:{nm}->{t}"
            edges.append(Edge(ename, nm, t, b.guard, Reset.of({v: 0 for v in sorted(b.reset)})))
            edge_map[ename] = b.edges
            if t not in index:
                index[t] = None
                queue.append(t)
    out = Automaton(h.name, h.vars, tuple(locs), tuple(edges), init_name)
    return Normalized(out, loc_map, edge_map, {"view": view})


# --------------------------------------------------------------------------- pipeline


@dataclass
class Pipeline:
    source: Automaton
    goal: str
    dr: Normalized
    cb: Normalized
    view: StrictView
    st: Optional[Normalized] = None

    def cb_to_source_loc(self, loc: str) -> str:
        return self.dr.loc_map[self.cb.loc_map[loc]]

    def cb_edge_to_source(self, edge: str) -> Optional[str]:
        """Source edge behind a bounded-automaton edge, ``None`` for wrap edges."""
        e = self.cb.edge_map[edge]
        return None if e is None else self.dr.edge_map[e]

    @property
    def goal_cb_locs(self) -> frozenset:
        return frozenset(l.name for l in self.cb.automaton.locations if self.cb_to_source_loc(l.name) == self.goal)

    def strict_automaton(self) -> Normalized:
        if self.st is None:
            self.st = strict(self.cb.automaton, self.view)
        return self.st

    def goal_set(self) -> list:
        st = self.strict_automaton()
        return [l.name for l in st.automaton.locations if self.cb_to_source_loc(st.loc_map[l.name]) == self.goal]


def check_class(h: Automaton) -> None:
    """Raise :class:`OutOfClass` naming the first feature outside the decidable class."""
    c = classify(h)
    if not c.diagonal_free:
        raise OutOfClass("diagonal constraint present")
    if not c.non_negative:
        raise OutOfClass("negative rate present")
    consts = [x for l in h.locations for x in l.invariant.constants()]
    for e in h.edges:
        consts.extend(e.guard.constants())
        consts.extend(x for _, iv in e.reset.entries for x in iv.constants())
    if any(x.denominator != 1 for x in consts):
        raise OutOfClass("non-integer constant in a guard, invariant or reset")


def normalize_pipeline(h: Automaton, goal: str, materialize: bool = False) -> Pipeline:
    if not h.has_location(goal):
        raise ModelError(f"unknown goal location {goal!r}")
    check_class(h)
    dr = dreset(h)
    cb = cbound(dr.automaton)
    p = Pipeline(h, goal, dr, cb, StrictView(cb.automaton))
    if materialize:
        p.strict_automaton()
    return p


def h3_violations(h: Automaton) -> list:
    """Edges whose guard is not True or a conjunction of ``x == 1`` atoms each paired with a reset of x."""
    bad = []
    for e in h.edges:
        if e.guard.is_true:
            continue
        if e.guard.is_false:
            bad.append(e.name)
            continue
        for a in e.guard.atoms:
            if not (isinstance(a, Rect) and a.interval == Interval.point(1) and e.reset.get(a.var) == ZERO_IV):
                bad.append(e.name)
                break
    return bad
