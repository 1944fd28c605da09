"""Time-bounded reachability: normalize, bound, enumerate skeletons, solve, lift the witness.

The search runs over the strict-time automaton H' in collapsed form: a search
node is a location of the bounded automaton plus a polyhedron over the current
values, and each step picks a zero-time burst to fire after a delay. Every
step is encoded as linear constraints. Alongside the H' constraints, each step
also carries the source automaton's own guards and invariants, evaluated on
``value in H' + offset``. The offset counts integer wraps and the value last
reset into, which keeps the check exact when source resets are intervals.
"""
from __future__ import annotations

import math
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .contraction import bound_cnt_star, bound_segment
from .core import (Automaton, Guard, Interval, ModelError, Rect, Run, State, TimedStep, frac, replay)
from .lra import (LinearConstraint, LinearSystem, LinearTerm, contains, feasible, project,
                  remove_redundant)
from .normalize import Burst, OutOfClass, Pipeline, normalize_pipeline

ZERO = Fraction(0)


# --------------------------------------------------------------------------- bounds


@dataclass(frozen=True)
class BoundBundle:
    E: Fraction      # cap on equality-guarded transitions
    W: int           # number of short time windows
    L: int
    K_seg: int
    K: int           # witness-length cap

    @property
    def equality_cap(self) -> int:
        return math.floor(self.E)


def bound_formula(n_vars: int, n_locs: int, n_edges: int, rmax, T) -> BoundBundle:
    rmax, T = frac(rmax), frac(T)
    E = n_vars * rmax * T
    W = math.ceil(T * (rmax + 1))
    L = bound_cnt_star(n_locs, n_edges)
    K_seg = bound_segment(n_vars, n_locs, n_edges)
    # at least one (possibly zero-duration) segment
    K = math.floor((E + max(W, 1)) * (K_seg + 1) + E)
    return BoundBundle(E, W, L, K_seg, K)


def compute_bounds(h_prime: Automaton, T) -> BoundBundle:
    """Bounds on H' after adding a True self-loop to every location."""
    n = len(h_prime.locations)
    return bound_formula(len(h_prime.vars), n, len(h_prime.edges) + n, h_prime.rmax, T)


# --------------------------------------------------------------------------- generic skeleton encoding


def _atom_constraints(atom, term_of) -> list:
    """Linear constraints for a guard atom; ``term_of(var)`` gives the value term."""
    if isinstance(atom, Rect):
        x, iv = term_of(atom.var), atom.interval
        out = []
        if iv.lo is not None:
            out.append(x.gt(iv.lo) if not iv.lo_closed else x.ge(iv.lo))
        if iv.hi is not None:
            out.append(x.lt(iv.hi) if not iv.hi_closed else x.le(iv.hi))
        return out
    d = term_of(atom.x) - term_of(atom.y)
    return [{"<": d.lt, "<=": d.le, "==": d.eq, ">=": d.ge, ">": d.gt}[atom.rel](atom.const)]


FALSE_CONSTRAINT = LinearConstraint(LinearTerm.constant(1), "<=")


def guard_constraints(g: Guard, term_of) -> list:
    if g.is_false:
        return [FALSE_CONSTRAINT]
    return [c for a in g.atoms for c in _atom_constraints(a, term_of)]


def rate_constraints(iv: Interval, d: LinearTerm, t: LinearTerm) -> list:
    """``d = r * t`` for some ``r`` in ``iv``, assuming ``t > 0`` when an endpoint is open."""
    out = []
    if iv.lo is not None:
        out.append((d - t.scale(iv.lo)).ge(0) if iv.lo_closed else (d - t.scale(iv.lo)).gt(0))
    if iv.hi is not None:
        out.append((d - t.scale(iv.hi)).le(0) if iv.hi_closed else (d - t.scale(iv.hi)).lt(0))
    return out


@dataclass
class SkeletonEncoding:
    system: LinearSystem
    delays: list     # unknown names per step
    effects: list    # per step: var -> unknown name
    resets: list     # per step: var -> unknown name (only non-singular resets)

    def path(self, h: Automaton, edges: Sequence[str], w) -> tuple:
        steps = []
        for k, e in enumerate(edges):
            t = w[self.delays[k]]
            loc = h.loc(h.edge(e).src)
            rates = None
            if not all(iv.is_singular() for _, iv in loc.rates):
                rates = {x: (w[self.effects[k][x]] / t if t else pick_in(loc.rate(x))) for x in h.vars}
            resets = {x: w[n] for x, n in self.resets[k].items()} or None
            steps.append(TimedStep(t, e, rates, resets))
        return tuple(steps)


def pick_in(iv: Interval) -> Fraction:
    """Some value inside a non-empty interval."""
    if iv.lo is not None and iv.hi is not None:
        return iv.lo if iv.lo == iv.hi else (iv.lo + iv.hi) / 2
    if iv.lo is not None:
        return iv.lo if iv.lo_closed else iv.lo + 1
    if iv.hi is not None:
        return iv.hi if iv.hi_closed else iv.hi - 1
    return ZERO


def encode_skeleton(h: Automaton, edges: Sequence[str], T=None, strict: bool = False,
                    bounded: Optional[Fraction] = None, s0: Optional[State] = None) -> SkeletonEncoding:
    """Linear system whose solutions are exactly the runs along ``edges`` (from ``s0``, default all-zero).

    Unknowns: delay ``t{k}``, effect ``d{k}.{x}``, chosen reset ``z{k}.{x}``. When ``strict`` is set,
    every delay after the first must be positive; ``bounded`` adds ``x <= bounded`` at delay ends.
    """
    s0 = s0 or State.initial(h)
    cons: list = []
    cur = {x: LinearTerm.constant(s0.valuation[x]) for x in h.vars}
    loc = s0.loc
    delays, effects, resets = [], [], []
    total = LinearTerm()
    for k, name in enumerate(edges):
        e = h.edge(name)
        if e.src != loc:
            raise ModelError(f"edge {name!r} does not leave {loc!r}")
        L = h.loc(loc)
        t = LinearTerm.var(f"t{k}")
        delays.append(f"t{k}")
        cons.append(t.gt(0) if strict and k > 0 else t.ge(0))
        eff = {}
        end = {}
        for x in h.vars:
            iv = L.rate(x)
            if iv.is_singular():
                d = t.scale(iv.lo)
            else:
                d = LinearTerm.var(f"d{k}.{x}")
                eff[x] = f"d{k}.{x}"
                cons.extend(rate_constraints(iv, d, t))
                if not (iv.lo_closed and iv.hi_closed) and not (strict and k > 0):
                    raise ModelError("open rate bounds need strict delays in skeleton encoding")
            end[x] = cur[x] + d
        effects.append(eff)
        cons.extend(guard_constraints(L.invariant, cur.__getitem__))
        cons.extend(guard_constraints(L.invariant, end.__getitem__))
        if bounded is not None:
            cons.extend(end[x].le(bounded) for x in h.vars)
        cons.extend(guard_constraints(e.guard, end.__getitem__))
        total = total + t
        chosen = {}
        nxt = dict(end)
        for x, iv in e.reset.entries:
            if iv.is_singular():
                nxt[x] = LinearTerm.constant(iv.lo)
            else:
                z = LinearTerm.var(f"z{k}.{x}")
                chosen[x] = f"z{k}.{x}"
                cons.extend(_atom_constraints(Rect(x, iv), lambda _v: z))
                nxt[x] = z
        resets.append(chosen)
        cur = nxt
        loc = e.trg
    if T is not None:
        cons.append(total.le(frac(T)))
    return SkeletonEncoding(LinearSystem.of(cons), delays, effects, resets)


# --------------------------------------------------------------------------- verdicts


@dataclass
class Query:
    automaton: Automaton
    goal: str
    T: Fraction

    def __post_init__(self):
        self.T = frac(self.T)
        if self.T < 0:
            raise ValueError("time bound must be non-negative")
        if not self.automaton.has_location(self.goal):
            raise ModelError(f"unknown goal location {self.goal!r}")


@dataclass
class Verdict:
    reachable: bool
    witness: Optional[Run] = None
    skeleton: tuple = ()            # ((bounded location, burst), ...) in H'
    bounds: Optional[BoundBundle] = None
    equality_steps: int = 0
    stats: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.reachable


# --------------------------------------------------------------------------- step encoding on H'


def _state_names(h: Automaton, tag: str) -> dict:
    return {"v": {x: f"v{tag}.{x}" for x in h.vars}, "o": {x: f"o{tag}.{x}" for x in h.vars}, "E": f"E{tag}"}


def _terms(names: dict) -> dict:
    return {"v": {x: LinearTerm.var(n) for x, n in names["v"].items()},
            "o": {x: LinearTerm.var(n) for x, n in names["o"].items()}, "E": LinearTerm.var(names["E"])}


@dataclass(frozen=True)
class Choice:
    """One skeleton step: delay in ``loc`` (zero or positive) then fire ``burst``."""

    loc: str
    burst: Burst
    zero_delay: bool = False


class _Encoder:
    def __init__(self, p: Pipeline, T: Fraction):
        self.p, self.T = p, T
        self.src = p.source
        self.cb = p.cb.automaton

    def step(self, k: int, choice: Choice, pre: dict, post_names: dict, first: bool):
        """Constraints linking state ``pre`` (terms) to ``post_names`` through one step."""
        p, src = self.p, self.src
        L = self.cb.loc(choice.loc)
        HL = src.loc(p.cb_to_source_loc(choice.loc))
        b = choice.burst
        cons: list = []
        t = LinearTerm.var(f"t{k}")
        if choice.zero_delay:
            cons.append(t.eq(0))
        elif first and not _has_open_rate(L):
            cons.append(t.ge(0))
        else:
            cons.append(t.gt(0))
        end, eff = {}, {}
        for x in self.cb.vars:
            iv = L.rate(x)
            if iv.is_singular():
                d = t.scale(iv.lo)
            else:
                d = LinearTerm.var(f"d{k}.{x}")
                eff[x] = f"d{k}.{x}"
                if choice.zero_delay:
                    cons.append(d.eq(0))
                else:
                    cons.extend(rate_constraints(iv, d, t))
            end[x] = pre["v"][x] + d
        E_end = pre["E"] + t
        cons.append(E_end.le(self.T))
        start_inv = L.invariant if first else Guard.of(L.invariant, b.inv)
        cons.extend(guard_constraints(start_inv, pre["v"].__getitem__))
        cons.extend(guard_constraints(Guard.of(L.invariant, b.inv), end.__getitem__))
        cons.extend(guard_constraints(b.guard, end.__getitem__))
        # source-level view: value = v + offset
        o = dict(pre["o"])
        cons.extend(guard_constraints(HL.invariant, lambda x: pre["v"][x] + o[x]))
        cons.extend(guard_constraints(HL.invariant, lambda x: end[x] + o[x]))
        cur = dict(end)
        zs: list = []
        for idx, ce in enumerate(b.edges):
            se = p.cb_edge_to_source(ce)
            cb_edge = self.cb.edge(ce)
            if se is None:
                (x,) = cb_edge.reset.vars
                o[x] = o[x] + 1
                cur[x] = LinearTerm()
                continue
            e = src.edge(se)
            cons.extend(guard_constraints(e.guard, lambda x: cur[x] + o[x]))
            for x, iv in e.reset.entries:
                if iv.is_singular():
                    o[x] = LinearTerm.constant(iv.lo)
                else:
                    zname = f"z{k}.{idx}.{x}"
                    z = LinearTerm.var(zname)
                    cons.extend(_atom_constraints(Rect(x, iv), lambda _v: z))
                    o[x] = z
                    zs.append((idx, se, x, zname))
                cur[x] = LinearTerm()
            if idx < len(b.edges) - 1:
                cons.extend(guard_constraints(src.loc(e.trg).invariant, lambda x: cur[x] + o[x]))
        for x in self.cb.vars:
            cons.append(LinearTerm.var(post_names["v"][x]).eq(cur[x]))
            cons.append(LinearTerm.var(post_names["o"][x]).eq(o[x]))
        cons.append(LinearTerm.var(post_names["E"]).eq(E_end))
        return cons, {"t": f"t{k}", "d": eff, "z": zs}

    def initial(self, names: dict) -> list:
        cons = [LinearTerm.var(names["E"]).eq(0)]
        for x in self.cb.vars:
            cons.append(LinearTerm.var(names["v"][x]).eq(0))
            cons.append(LinearTerm.var(names["o"][x]).eq(0))
        return cons


def _has_open_rate(L) -> bool:
    return any(not (iv.lo_closed or iv.lo is None) or not (iv.hi_closed or iv.hi is None) for _, iv in L.rates)


# --------------------------------------------------------------------------- search


def _flat(names: dict) -> list:
    return list(names["v"].values()) + list(names["o"].values()) + [names["E"]]


def _rename(c: LinearConstraint, m: dict) -> LinearConstraint:
    return LinearConstraint(LinearTerm.of({m.get(u, u): a for u, a in c.term.coeffs}, c.term.const), c.rel)


def _backward_reach(h: Automaton, targets) -> frozenset:
    rev: dict = {l.name: [] for l in h.locations}
    for e in h.edges:
        rev[e.trg].append(e.src)
    seen = set(targets)
    queue = deque(targets)
    while queue:
        l = queue.popleft()
        for s in rev[l]:
            if s not in seen:
                seen.add(s)
                queue.append(s)
    return frozenset(seen)


class _Search:
    def __init__(self, p: Pipeline, T: Fraction, K: int):
        self.p, self.T, self.K = p, T, K
        self.enc = _Encoder(p, T)
        self.cb = p.cb.automaton
        self.goal = p.goal_cb_locs
        self.useful = _backward_reach(self.cb, self.goal)
        self.cur = _state_names(self.cb, "")
        self.nxt = _state_names(self.cb, "'")
        self.keep = _flat(self.cur)
        self.to_prev = dict(zip(self.keep, _flat(_state_names(self.cb, "~"))))
        self.to_cur = dict(zip(_flat(self.nxt), self.keep))
        self.nodes = 0

    def first_choices(self) -> list:
        loc = self.cb.init
        out = []
        for b in self.p.view.bursts(loc):
            if b.trg not in self.useful:
                continue
            if _has_open_rate(self.cb.loc(loc)):
                out.append(Choice(loc, b, zero_delay=True))
            out.append(Choice(loc, b))
        return out

    def choices(self, loc: str) -> list:
        return [Choice(loc, b) for b in self.p.view.bursts(loc) if b.trg in self.useful]

    def successor(self, state: LinearSystem, choice: Choice, first: bool) -> Optional[LinearSystem]:
        prev = _state_names(self.cb, "~")
        cons, _ = self.enc.step(0, choice, _terms(prev), self.nxt, first)
        sys = LinearSystem.of([_rename(c, self.to_prev) for c in state.constraints] + cons)
        # projection is exact, so emptiness can be tested on the smaller system
        proj = project(sys, list(self.to_cur))
        if not feasible(proj).sat:
            return None
        return remove_redundant(LinearSystem.of([_rename(c, self.to_cur) for c in proj.constraints], self.keep))

    def initial_state(self) -> LinearSystem:
        return LinearSystem.of(self.enc.initial(self.cur), self.keep)

    def run_subtree(self, root: Choice) -> Optional[list]:
        """Depth-first search below one first step; returns the skeleton of the first goal hit."""
        visited: dict = {}
        start = self.successor(self.initial_state(), root, first=True)
        if start is None:
            return None
        stack = [(root.burst.trg, start, [root], 0)]
        while stack:
            loc, P, skel, it = stack.pop()
            if it == 0:
                self.nodes += 1
                if loc in self.goal:
                    return skel
                if len(skel) >= self.K:
                    continue
                if any(d <= len(skel) and contains(Q, P) for Q, d in visited.get(loc, ())):
                    continue
                visited.setdefault(loc, []).append((P, len(skel)))
            opts = self.choices(loc)
            if it < len(opts):
                stack.append((loc, P, skel, it + 1))
                nxt = self.successor(P, opts[it], first=False)
                if nxt is not None:
                    stack.append((opts[it].burst.trg, nxt, skel + [opts[it]], 0))
        return None


def _subtree_worker(args):
    h, goal, T, K, idx = args
    p = normalize_pipeline(h, goal)
    s = _Search(p, T, K)
    skel = s.run_subtree(s.first_choices()[idx])
    return idx, (None if skel is None else [(c.loc, c.burst, c.zero_delay) for c in skel]), s.nodes


def skeleton_system(p: Pipeline, T: Fraction, skel: Sequence[Choice]):
    enc = _Encoder(p, T)
    names = [_state_names(p.cb.automaton, f"@{k}") for k in range(len(skel) + 1)]
    cons = enc.initial(names[0])
    info = []
    for k, c in enumerate(skel):
        cs, inf = enc.step(k, c, _terms(names[k]), names[k + 1], first=(k == 0))
        cons.extend(cs)
        info.append(inf)
    return LinearSystem.of(cons), info


def lift_witness(p: Pipeline, skel: Sequence[Choice], w: dict, info: list) -> tuple:
    """Map a solved H' skeleton to a timed path of the source automaton."""
    src = p.source
    steps: list = []
    pending_t = ZERO
    pending_d: dict = {}
    for k, c in enumerate(skel):
        hl = src.loc(p.cb_to_source_loc(c.loc))
        t = w[info[k]["t"]]
        pending_t += t
        for x in src.vars:
            iv = hl.rate(x)
            d = iv.lo * t if iv.is_singular() else w[info[k]["d"][x]]
            pending_d[x] = pending_d.get(x, ZERO) + d
        zmap: dict = {}
        for idx, se, x, zname in info[k]["z"]:
            zmap.setdefault(idx, {})[x] = w[zname]
        for idx, ce in enumerate(c.burst.edges):
            se = p.cb_edge_to_source(ce)
            if se is None:
                continue
            rates = None
            if not all(iv.is_singular() for _, iv in hl.rates):
                rates = {x: (pending_d[x] / pending_t if pending_t else pick_in(hl.rate(x))) for x in src.vars}
            steps.append(TimedStep(pending_t, se, rates, zmap.get(idx)))
            pending_t, pending_d = ZERO, {}
            hl = src.loc(src.edge(se).trg)
    return tuple(steps)


def count_equality_steps(skel: Sequence[Choice]) -> int:
    one = Interval.point(1)
    return sum(1 for c in skel if any(isinstance(a, Rect) and a.interval == one and a.var in c.burst.reset
                                      for a in c.burst.guard.atoms))


def decide_tb_reach(q: Query, jobs: Optional[int] = None, bounds: bool = True) -> Verdict:
    """YES with a replayed witness of the source automaton, or NO."""
    h, T = q.automaton, q.T
    p = normalize_pipeline(h, q.goal)
    bb = compute_bounds(p.strict_automaton().automaton, T) if bounds else None
    K = bb.K if bb else 10 ** 9
    if h.init == q.goal:
        run = replay(h, State.initial(h), ())
        return Verdict(True, run, (), bb, 0, {"nodes": 0})
    search = _Search(p, T, K)
    roots = search.first_choices()
    if jobs is None:
        jobs = int(os.environ.get("TBREACH_JOBS", "1") or 1)
    found = None
    nodes = 0
    if jobs > 1 and len(roots) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = sorted(ex.map(_subtree_worker, [(h, q.goal, T, K, i) for i in range(len(roots))]),
                             key=lambda r: r[0])
        for idx, sk, n in results:
            nodes += n
            if sk is not None and found is None:
                found = [Choice(l, b, z) for l, b, z in sk]
    else:
        for root in roots:
            found = search.run_subtree(root)
            if found is not None:
                break
        nodes = search.nodes
    if found is None:
        return Verdict(False, None, (), bb, 0, {"nodes": nodes})
    system, info = skeleton_system(p, T, found)
    sol = feasible(system)
    if not sol.sat:
        raise AssertionError("skeleton accepted by the search is infeasible")
    path = lift_witness(p, found, sol.witness, info)
    run = replay(h, State.initial(h), path)
    if run.last.loc != q.goal or run.duration > T:
        raise AssertionError("lifted witness does not reach the goal within the bound")
    eq = count_equality_steps(found)
    if bb is not None and eq > bb.equality_cap:
        raise AssertionError(f"{eq} equality-guarded steps exceed the cap {bb.equality_cap}")
    return Verdict(True, run, tuple(found), bb, eq, {"nodes": nodes})


def check(h: Automaton, goal: str, T, jobs: Optional[int] = None) -> Verdict:
    return decide_tb_reach(Query(h, goal, frac(T)), jobs)


__all__ = ["BoundBundle", "compute_bounds", "bound_formula", "encode_skeleton", "Query", "Verdict",
           "decide_tb_reach", "check", "OutOfClass", "count_equality_steps", "skeleton_system"]
