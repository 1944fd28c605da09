"""Data model and exact operational semantics of linear/rectangular hybrid automata.

Every number is a :class:`fractions.Fraction`; infinite interval endpoints are
represented by ``None``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, Union

Number = Union[int, Fraction]

RELATIONS = ("<", "<=", "==", ">=", ">")


class ModelError(ValueError):
    """A structurally invalid automaton, path or query."""


class StepRejected(Exception):
    """A time or edge step that the semantics does not allow."""

    def __init__(self, message: str, atom=None):
        super().__init__(message)
        self.atom = atom


def frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


# --------------------------------------------------------------------------- intervals


@dataclass(frozen=True)
class Interval:
    lo: Optional[Fraction]
    hi: Optional[Fraction]
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if self.lo is not None:
            object.__setattr__(self, "lo", frac(self.lo))
        else:
            object.__setattr__(self, "lo_closed", False)
        if self.hi is not None:
            object.__setattr__(self, "hi", frac(self.hi))
        else:
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def point(cls, v: Number) -> "Interval":
        return cls(frac(v), frac(v))

    @classmethod
    def closed(cls, a: Number, b: Number) -> "Interval":
        return cls(frac(a), frac(b))

    @classmethod
    def full(cls) -> "Interval":
        return cls(None, None, False, False)

    @classmethod
    def from_relation(cls, rel: str, k: Number) -> "Interval":
        k = frac(k)
        return {
            "<": cls(None, k, False, False),
            "<=": cls(None, k, False, True),
            "==": cls(k, k),
            ">=": cls(k, None, True, False),
            ">": cls(k, None, False, False),
        }[rel]

    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def is_singular(self) -> bool:
        return self.lo is not None and self.lo == self.hi and self.lo_closed and self.hi_closed

    def is_full(self) -> bool:
        return self.lo is None and self.hi is None

    def contains(self, v: Fraction) -> bool:
        if self.lo is not None and (v < self.lo or (v == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (v > self.hi or (v == self.hi and not self.hi_closed)):
            return False
        return True

    def intersect(self, other: "Interval") -> "Interval":
        lo, lo_c = self.lo, self.lo_closed
        if other.lo is not None and (lo is None or other.lo > lo or (other.lo == lo and not other.lo_closed)):
            lo, lo_c = other.lo, other.lo_closed
        hi, hi_c = self.hi, self.hi_closed
        if other.hi is not None and (hi is None or other.hi < hi or (other.hi == hi and not other.hi_closed)):
            hi, hi_c = other.hi, other.hi_closed
        return Interval(lo, hi, lo_c, hi_c)

    def minus(self, other: "Interval") -> "Interval":
        """Set difference in the Minkowski sense: ``{x | exists y in self, z in other: x + z = y}``."""
        lo = None if self.lo is None or other.hi is None else self.lo - other.hi
        hi = None if self.hi is None or other.lo is None else self.hi - other.lo
        return Interval(lo, hi, self.lo_closed and other.hi_closed, self.hi_closed and other.lo_closed)

    def constants(self) -> tuple:
        return tuple(b for b in (self.lo, self.hi) if b is not None)

    def __str__(self) -> str:
        from .dsl import format_interval

        return format_interval(self)


# --------------------------------------------------------------------------- atoms and guards


@dataclass(frozen=True)
class Rect:
    """Rectangular atom ``var in interval``."""

    var: str
    interval: Interval

    @property
    def vars(self) -> tuple:
        return (self.var,)

    def holds(self, nu: Mapping[str, Fraction]) -> bool:
        return self.interval.contains(_lookup(nu, self.var))

    def constants(self) -> tuple:
        return self.interval.constants()


@dataclass(frozen=True)
class Diag:
    """Diagonal atom ``x - y rel const``."""

    x: str
    y: str
    rel: str
    const: Fraction

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ModelError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "const", frac(self.const))

    @property
    def vars(self) -> tuple:
        return (self.x, self.y)

    def holds(self, nu: Mapping[str, Fraction]) -> bool:
        d = _lookup(nu, self.x) - _lookup(nu, self.y)
        return Interval.from_relation(self.rel, self.const).contains(d)

    def constants(self) -> tuple:
        return (self.const,)


Atom = Union[Rect, Diag]


def _lookup(nu: Mapping[str, Fraction], var: str) -> Fraction:
    try:
        return nu[var]
    except KeyError:
        raise ModelError(f"unknown variable {var!r}") from None


@dataclass(frozen=True)
class Guard:
    """Conjunction of atoms kept in reduced form; ``FALSE`` and ``TRUE`` stand alone."""

    atoms: tuple = ()
    is_false: bool = False

    @classmethod
    def of(cls, *parts) -> "Guard":
        """Build a reduced guard from atoms and/or guards."""
        atoms: list = []
        for part in _flatten(parts):
            if isinstance(part, Guard):
                if part.is_false:
                    return FALSE
                items = part.atoms
            else:
                items = (part,)
            for atom in items:
                if isinstance(atom, Rect) and atom.interval.is_empty():
                    return FALSE
                if atom not in atoms:
                    atoms.append(atom)
        return cls(tuple(atoms))

    @property
    def is_true(self) -> bool:
        return not self.is_false and not self.atoms

    def holds(self, nu: Mapping[str, Fraction]) -> bool:
        if self.is_false:
            return False
        return all(a.holds(nu) for a in self.atoms)

    def violated_atom(self, nu: Mapping[str, Fraction]):
        if self.is_false:
            return "false"
        for a in self.atoms:
            if not a.holds(nu):
                return a
        return None

    @property
    def vars(self) -> frozenset:
        return frozenset(v for a in self.atoms for v in a.vars)

    def constants(self) -> tuple:
        return tuple(c for a in self.atoms for c in a.constants())

    def __and__(self, other: "Guard") -> "Guard":
        return Guard.of(self, other)


def _flatten(parts):
    for p in parts:
        if isinstance(p, (Rect, Diag, Guard)):
            yield p
        else:
            yield from _flatten(p)


TRUE = Guard()
FALSE = Guard((), True)


def eval_guard(g: Guard, nu: Mapping[str, Fraction]) -> bool:
    return g.holds(nu)


# --------------------------------------------------------------------------- structure


@dataclass(frozen=True)
class Reset:
    """Per-variable reset intervals; variables not listed keep their value."""

    entries: tuple = ()

    @classmethod
    def of(cls, mapping: Mapping[str, Union[Interval, Number]] | Iterable = ()) -> "Reset":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        out = []
        for var, iv in items:
            if not isinstance(iv, Interval):
                iv = Interval.point(iv)
            out.append((var, iv))
        return cls(tuple(out))

    def get(self, var: str) -> Optional[Interval]:
        for v, iv in self.entries:
            if v == var:
                return iv
        return None

    @property
    def vars(self) -> tuple:
        return tuple(v for v, _ in self.entries)

    def is_deterministic(self) -> bool:
        return all(iv.is_singular() for _, iv in self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)


@dataclass(frozen=True)
class Location:
    name: str
    rates: tuple  # ((var, Interval), ...) in the automaton's variable order
    invariant: Guard = TRUE

    def rate(self, var: str) -> Interval:
        for v, iv in self.rates:
            if v == var:
                return iv
        raise ModelError(f"location {self.name!r} has no rate for {var!r}")

    def singular_rates(self) -> dict:
        out = {}
        for v, iv in self.rates:
            if not iv.is_singular():
                raise ModelError(f"rate of {v!r} in {self.name!r} is not singular")
            out[v] = iv.lo
        return out


@dataclass(frozen=True)
class Edge:
    name: str
    src: str
    trg: str
    guard: Guard = TRUE
    reset: Reset = Reset()


@dataclass(frozen=True)
class Automaton:
    name: str
    vars: tuple
    locations: tuple
    edges: tuple
    init: str

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(set(self.vars)) != len(self.vars):
            raise ModelError("duplicate variable")
        names = [l.name for l in self.locations]
        if len(set(names)) != len(names):
            raise ModelError("duplicate location")
        if self.init not in names:
            raise ModelError(f"initial location {self.init!r} does not exist")
        enames = [e.name for e in self.edges]
        if len(set(enames)) != len(enames):
            raise ModelError("duplicate edge name")
        known = set(self.vars)
        for l in self.locations:
            if tuple(v for v, _ in l.rates) != self.vars:
                raise ModelError(f"location {l.name!r} must give one rate per variable, in order")
            for _, iv in l.rates:
                if iv.is_empty():
                    raise ModelError(f"empty rate interval in {l.name!r}")
            _check_vars(l.invariant.vars, known, l.name)
        for e in self.edges:
            if e.src not in names or e.trg not in names:
                raise ModelError(f"edge {e.name!r} refers to an unknown location")
            _check_vars(e.guard.vars, known, e.name)
            _check_vars(e.reset.vars, known, e.name)

    @cached_property
    def _locs(self) -> dict:
        return {l.name: l for l in self.locations}

    @cached_property
    def _edges(self) -> dict:
        return {e.name: e for e in self.edges}

    @cached_property
    def _out(self) -> dict:
        out: dict = {l.name: [] for l in self.locations}
        for e in self.edges:
            out[e.src].append(e)
        return {k: tuple(v) for k, v in out.items()}

    def loc(self, name: str) -> Location:
        try:
            return self._locs[name]
        except KeyError:
            raise ModelError(f"unknown location {name!r}") from None

    def edge(self, name: str) -> Edge:
        try:
            return self._edges[name]
        except KeyError:
            raise ModelError(f"unknown edge {name!r}") from None

    def out_edges(self, loc: str) -> tuple:
        return self._out[loc]

    def has_location(self, name: str) -> bool:
        return name in self._locs

    @cached_property
    def rmax(self) -> Fraction:
        consts = [abs(c) for l in self.locations for _, iv in l.rates for c in iv.constants()]
        return max(consts, default=Fraction(0))

    @cached_property
    def cmax(self) -> Fraction:
        consts = [c for l in self.locations for c in l.invariant.constants()]
        for e in self.edges:
            consts.extend(e.guard.constants())
            for _, iv in e.reset.entries:
                consts.extend(iv.constants())
        return max([abs(c) for c in consts], default=Fraction(0))


def _check_vars(used, known, where):
    for v in used:
        if v not in known:
            raise ModelError(f"unknown variable {v!r} in {where!r}")


def make_location(name: str, vars: Sequence[str], rates: Mapping[str, Union[Interval, Number]] = (),
                  invariant: Guard = TRUE) -> Location:
    """Location with rates given per variable; unspecified variables get rate 0."""
    rates = dict(rates)
    row = []
    for v in vars:
        iv = rates.pop(v, Fraction(0))
        row.append((v, iv if isinstance(iv, Interval) else Interval.point(iv)))
    if rates:
        raise ModelError(f"unknown variable {next(iter(rates))!r} in rates of {name!r}")
    return Location(name, tuple(row), invariant)


# --------------------------------------------------------------------------- classification


@dataclass(frozen=True)
class Classification:
    singular: bool
    fixed_rate: bool
    multirate: bool
    non_negative: bool
    rectangular: bool
    diagonal_free: bool
    initialized: bool
    deterministic_resets: bool


def classify(h: Automaton) -> Classification:
    rates = [(l, v, iv) for l in h.locations for v, iv in l.rates]
    singular = all(iv.is_singular() for _, _, iv in rates)
    fixed = all(len({l.rate(v) for l in h.locations}) <= 1 for v in h.vars)
    non_neg = all(iv.lo is not None and iv.lo >= 0 for _, _, iv in rates)
    diag_free = not any(
        isinstance(a, Diag)
        for g in [l.invariant for l in h.locations] + [e.guard for e in h.edges]
        for a in g.atoms
    )
    initialized = all(
        e.reset.get(v) is not None
        for e in h.edges
        for v in h.vars
        if h.loc(e.src).rate(v) != h.loc(e.trg).rate(v)
    )
    det = all(e.reset.is_deterministic() for e in h.edges)
    return Classification(singular, fixed, not fixed, non_neg, diag_free, diag_free, initialized, det)


# --------------------------------------------------------------------------- states, paths, runs


@dataclass(frozen=True)
class State:
    loc: str
    valuation: Mapping[str, Fraction]

    @classmethod
    def of(cls, loc: str, valuation: Mapping[str, Number]) -> "State":
        return cls(loc, MappingProxyType({k: frac(v) for k, v in valuation.items()}))

    @classmethod
    def initial(cls, h: Automaton) -> "State":
        return cls.of(h.init, {v: 0 for v in h.vars})

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self.loc == other.loc and dict(self.valuation) == dict(other.valuation)

    def __hash__(self):
        return hash((self.loc, tuple(sorted(self.valuation.items()))))

    def __repr__(self):
        vals = ", ".join(f"{k}={v}" for k, v in self.valuation.items())
        return f"State({self.loc}, {vals})"


@dataclass(frozen=True)
class TimedStep:
    """Delay in the source location, then the edge.

    ``rates`` is the chosen rate vector (``None`` means the location's singular
    rates); ``resets`` holds chosen values for non-singular reset intervals.
    """

    delay: Fraction
    edge: str
    rates: Optional[Mapping[str, Fraction]] = None
    resets: Optional[Mapping[str, Fraction]] = None

    def __post_init__(self):
        object.__setattr__(self, "delay", frac(self.delay))
        if self.rates is not None:
            object.__setattr__(self, "rates", MappingProxyType({k: frac(v) for k, v in self.rates.items()}))
        if self.resets is not None:
            object.__setattr__(self, "resets", MappingProxyType({k: frac(v) for k, v in self.resets.items()}))

    def __eq__(self, other):
        if not isinstance(other, TimedStep):
            return NotImplemented
        return (self.delay, self.edge, _d(self.rates), _d(self.resets)) == (
            other.delay, other.edge, _d(other.rates), _d(other.resets))

    def __hash__(self):
        return hash((self.delay, self.edge))


def _d(m):
    return None if m is None else dict(m)


TimedPath = tuple  # tuple[TimedStep, ...]


def timed_path(pairs: Iterable) -> TimedPath:
    """``[(delay, edge), ...]`` -> timed path with forced (singular) rates."""
    return tuple(p if isinstance(p, TimedStep) else TimedStep(frac(p[0]), p[1]) for p in pairs)


def check_chain(h: Automaton, path: Sequence[TimedStep], start: Optional[str] = None) -> None:
    prev = start
    for step in path:
        e = h.edge(step.edge)
        if prev is not None and e.src != prev:
            raise ModelError(f"edge {e.name!r} does not start where the previous edge ended ({prev!r})")
        prev = e.trg


def step_rates(h: Automaton, step: TimedStep) -> dict:
    loc = h.loc(h.edge(step.edge).src)
    if step.rates is None:
        return loc.singular_rates()
    return dict(step.rates)


def duration(path: Iterable[TimedStep]) -> Fraction:
    return sum((s.delay for s in path), Fraction(0))


def effect(h: Automaton, path: Iterable[TimedStep], var: str) -> Fraction:
    """Sum of rate(var) * delay along the path (resets ignored)."""
    return sum((step_rates(h, s)[var] * s.delay for s in path), Fraction(0))


def time_step(h: Automaton, s: State, t: Number, rates: Optional[Mapping[str, Number]] = None) -> State:
    t = frac(t)
    if t < 0:
        raise StepRejected(f"negative delay {t}")
    loc = h.loc(s.loc)
    r = loc.singular_rates() if rates is None else {k: frac(v) for k, v in rates.items()}
    for v in h.vars:
        if not loc.rate(v).contains(r[v]):
            raise StepRejected(f"rate {r[v]} for {v} outside {loc.rate(v)} in {loc.name}")
    bad = loc.invariant.violated_atom(s.valuation)
    if bad is not None:
        raise StepRejected(f"invariant of {loc.name} violated before delay", bad)
    nu = {v: s.valuation[v] + r[v] * t for v in h.vars}
    bad = loc.invariant.violated_atom(nu)
    if bad is not None:
        raise StepRejected(f"invariant of {loc.name} violated after delay {t}", bad)
    return State.of(s.loc, nu)


def edge_step(h: Automaton, s: State, edge: str, chosen_resets: Optional[Mapping[str, Number]] = None) -> State:
    e = h.edge(edge)
    if e.src != s.loc:
        raise ModelError(f"edge {edge!r} does not leave {s.loc!r}")
    bad = e.guard.violated_atom(s.valuation)
    if bad is not None:
        raise StepRejected(f"guard of {edge} violated", bad)
    chosen = {k: frac(v) for k, v in (chosen_resets or {}).items()}
    nu = dict(s.valuation)
    for var, iv in e.reset.entries:
        if var in chosen:
            val = chosen[var]
        elif iv.is_singular():
            val = iv.lo
        else:
            raise ModelError(f"edge {edge!r} needs a chosen value for the reset of {var!r}")
        if not iv.contains(val):
            raise StepRejected(f"reset value {val} for {var} outside {iv}")
        nu[var] = val
    return State.of(e.trg, nu)


@dataclass(frozen=True)
class Run:
    """``states[i] --steps[i].delay--> . --steps[i].edge--> states[i+1]``."""

    automaton: Automaton = field(repr=False, compare=False)
    steps: tuple
    states: tuple

    @property
    def first(self) -> State:
        return self.states[0]

    @property
    def last(self) -> State:
        return self.states[-1]

    @property
    def duration(self) -> Fraction:
        return duration(self.steps)

    def __len__(self) -> int:
        return len(self.states)

    def is_strict(self) -> bool:
        # the first delay may be zero; every later one must be positive
        return all(s.delay > 0 for s in self.steps[1:])

    def is_time_bounded(self, bound: Number) -> bool:
        return self.duration <= frac(bound)

    def is_variable_bounded(self, k: Number) -> bool:
        k = frac(k)
        if any(v > k for v in self.first.valuation.values()):
            return False
        for s, step in zip(self.states, self.steps):
            after = time_step(self.automaton, s, step.delay, step_rates(self.automaton, step))
            if any(v > k for v in after.valuation.values()):
                return False
        return True

    def post_delay_states(self) -> list:
        return [time_step(self.automaton, s, st.delay, step_rates(self.automaton, st))
                for s, st in zip(self.states, self.steps)]


def replay(h: Automaton, s0: State, path: Sequence[TimedStep]) -> Run:
    """Replay a path exactly; raises :class:`StepRejected` on the first violation."""
    check_chain(h, path, s0.loc)
    states = [s0]
    s = s0
    for step in path:
        mid = time_step(h, s, step.delay, step.rates)
        s = edge_step(h, mid, step.edge, step.resets)
        states.append(s)
    return Run(h, tuple(path), tuple(states))


def run_of(h: Automaton, s0: State, path: Sequence[TimedStep]) -> Optional[Run]:
    """The unique run from ``s0`` along ``path``, or ``None`` if a guard or invariant fails."""
    try:
        return replay(h, s0, path)
    except StepRejected:
        return None
