"""Exact feasibility for conjunctions of linear constraints over the rationals.

Decision is by Fourier-Motzkin elimination with native strict inequalities.
Equalities are consumed first by Gaussian substitution. Satisfiable systems
come with a witness rebuilt by back-substitution and checked before return.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)
_RELS = ("<", "<=", "==")


@dataclass(frozen=True)
class LinearTerm:
    """``sum(coeffs[u] * u) + const``; zero coefficients are never stored."""

    coeffs: tuple = ()  # sorted ((unknown, coef), ...)
    const: Fraction = ZERO

    @classmethod
    def of(cls, coeffs: Mapping[str, object] | Iterable = (), const=0) -> "LinearTerm":
        acc: dict = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for u, c in items:
            acc[u] = acc.get(u, ZERO) + Fraction(c)
        return cls(tuple(sorted((u, c) for u, c in acc.items() if c != 0)), Fraction(const))

    @classmethod
    def var(cls, u: str, coef=1) -> "LinearTerm":
        return cls.of({u: coef})

    @classmethod
    def constant(cls, c) -> "LinearTerm":
        return cls((), Fraction(c))

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def coef(self, u: str) -> Fraction:
        for v, c in self.coeffs:
            if v == u:
                return c
        return ZERO

    @property
    def unknowns(self) -> tuple:
        return tuple(u for u, _ in self.coeffs)

    def __add__(self, other) -> "LinearTerm":
        other = _as_term(other)
        return LinearTerm.of(list(self.coeffs) + list(other.coeffs), self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinearTerm":
        return LinearTerm(tuple((u, -c) for u, c in self.coeffs), -self.const)

    def __sub__(self, other) -> "LinearTerm":
        return self + (-_as_term(other))

    def __rsub__(self, other) -> "LinearTerm":
        return _as_term(other) - self

    def scale(self, k) -> "LinearTerm":
        k = Fraction(k)
        if k == 0:
            return LinearTerm()
        return LinearTerm(tuple((u, c * k) for u, c in self.coeffs), self.const * k)

    def __mul__(self, k) -> "LinearTerm":
        return self.scale(k)

    __rmul__ = __mul__

    def evaluate(self, w: Mapping[str, Fraction]) -> Fraction:
        return self.const + sum((c * w[u] for u, c in self.coeffs), ZERO)

    def substitute(self, u: str, repl: "LinearTerm") -> "LinearTerm":
        a = self.coef(u)
        if a == 0:
            return self
        rest = LinearTerm(tuple((v, c) for v, c in self.coeffs if v != u), self.const)
        return rest + repl.scale(a)

    # comparisons build constraints
    def le(self, other=0) -> "LinearConstraint":
        return LinearConstraint(self - other, "<=")

    def lt(self, other=0) -> "LinearConstraint":
        return LinearConstraint(self - other, "<")

    def ge(self, other=0) -> "LinearConstraint":
        return LinearConstraint(_as_term(other) - self, "<=")

    def gt(self, other=0) -> "LinearConstraint":
        return LinearConstraint(_as_term(other) - self, "<")

    def eq(self, other=0) -> "LinearConstraint":
        return LinearConstraint(self - other, "==")

    def __str__(self) -> str:
        parts = [f"{c}*{u}" for u, c in self.coeffs]
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)


def _as_term(x) -> LinearTerm:
    if isinstance(x, LinearTerm):
        return x
    if isinstance(x, str):
        return LinearTerm.var(x)
    return LinearTerm.constant(x)


@dataclass(frozen=True)
class LinearConstraint:
    """Canonical form ``term rel 0`` with ``rel`` in ``<``, ``<=``, ``==``."""

    term: LinearTerm
    rel: str

    def __post_init__(self):
        if self.rel not in _RELS:
            raise ValueError(f"relation must be one of {_RELS}, got {self.rel!r}")

    @property
    def unknowns(self) -> tuple:
        return self.term.unknowns

    def holds(self, w: Mapping[str, Fraction]) -> bool:
        v = self.term.evaluate(w)
        return v < 0 if self.rel == "<" else v <= 0 if self.rel == "<=" else v == 0

    def negations(self) -> list:
        """Constraints whose disjunction is the complement."""
        if self.rel == "<=":
            return [LinearConstraint(-self.term, "<")]
        if self.rel == "<":
            return [LinearConstraint(-self.term, "<=")]
        return [LinearConstraint(self.term, "<"), LinearConstraint(-self.term, "<")]

    def split(self) -> list:
        if self.rel == "==":
            return [LinearConstraint(self.term, "<="), LinearConstraint(-self.term, "<=")]
        return [self]

    def __str__(self) -> str:
        return f"{self.term} {self.rel} 0"


@dataclass(frozen=True)
class LinearSystem:
    unknowns: tuple
    constraints: tuple

    def __post_init__(self):
        object.__setattr__(self, "unknowns", tuple(self.unknowns))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        declared = set(self.unknowns)
        for c in self.constraints:
            for u in c.unknowns:
                if u not in declared:
                    raise ValueError(f"constraint mentions undeclared unknown {u!r}")

    @classmethod
    def of(cls, constraints: Iterable[LinearConstraint], unknowns: Sequence[str] = ()) -> "LinearSystem":
        constraints = tuple(constraints)
        names = list(unknowns)
        seen = set(names)
        for c in constraints:
            for u in c.unknowns:
                if u not in seen:
                    seen.add(u)
                    names.append(u)
        return cls(tuple(names), constraints)

    def add(self, *cs: LinearConstraint) -> "LinearSystem":
        return LinearSystem.of(self.constraints + cs, self.unknowns)

    def __len__(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class Feasibility:
    sat: bool
    witness: Optional[Mapping[str, Fraction]] = None

    def __bool__(self) -> bool:
        return self.sat


UNSAT = Feasibility(False)


class CertificateError(AssertionError):
    """Internal error: a reconstructed witness failed its own check."""


def check_witness(system: LinearSystem, w: Mapping[str, Fraction]) -> bool:
    return all(c.holds(w) for c in system.constraints)


# --------------------------------------------------------------------------- core elimination


def _normalize(c: LinearConstraint):
    """Scale so the leading coefficient has magnitude 1 (sign kept for inequalities)."""
    if not c.term.coeffs:
        return c
    lead = abs(c.term.coeffs[0][1])
    if c.rel == "==" and c.term.coeffs[0][1] < 0:
        lead = -lead
    return LinearConstraint(c.term.scale(ONE / lead), c.rel) if lead != 1 else c


def _simplify(cons: Iterable[LinearConstraint]):
    """Drop tautologies, detect constant contradictions, keep the tightest of parallel bounds.

    Returns ``None`` on a detected contradiction.
    """
    eqs: dict = {}
    ineqs: dict = {}
    for c in cons:
        c = _normalize(c)
        if not c.term.coeffs:
            if not c.holds({}):
                return None
            continue
        key = c.term.coeffs
        if c.rel == "==":
            prev = eqs.get(key)
            if prev is not None and prev.term.const != c.term.const:
                return None
            eqs[key] = c
            continue
        prev = ineqs.get(key)
        # a.x + k rel 0: larger k is tighter; at equal k strict is tighter
        if prev is None or c.term.const > prev.term.const or (
                c.term.const == prev.term.const and c.rel == "<"):
            ineqs[key] = c
    out = list(eqs.values())
    for key, c in ineqs.items():
        # opposite-direction pair with the same coefficients: quick contradiction check
        neg = tuple((u, -a) for u, a in key)
        other = ineqs.get(neg)
        if other is not None:
            s = c.term.const + other.term.const
            if s > 0 or (s == 0 and (c.rel == "<" or other.rel == "<")):
                return None
        out.append(c)
    return out


def _pick_var(cons, vars_):
    best, best_cost = None, None
    for u in vars_:
        pos = neg = 0
        for c in cons:
            a = c.term.coef(u)
            if a > 0:
                pos += 1
            elif a < 0:
                neg += 1
        cost = (pos * neg - pos - neg, pos + neg)
        if best_cost is None or cost < best_cost:
            best, best_cost = u, cost
    return best


def _combine(lo: LinearConstraint, hi: LinearConstraint, u: str) -> LinearConstraint:
    a_lo = lo.term.coef(u)  # < 0
    a_hi = hi.term.coef(u)  # > 0
    term = lo.term.scale(a_hi) + hi.term.scale(-a_lo)
    rel = "<" if "<" in (lo.rel, hi.rel) else "<="
    return LinearConstraint(term, rel)


def eliminate_constraints(cons: Sequence[LinearConstraint], u: str):
    """One elimination step for ``u``; returns ``None`` if a contradiction shows up."""
    for c in cons:
        if c.rel == "==" and c.term.coef(u) != 0:
            a = c.term.coef(u)
            repl = LinearTerm(tuple((v, -b / a) for v, b in c.term.coeffs if v != u), -c.term.const / a)
            return _simplify(LinearConstraint(d.term.substitute(u, repl), d.rel) for d in cons if d is not c)
    lows, highs, rest = [], [], []
    for c in cons:
        a = c.term.coef(u)
        (highs if a > 0 else lows if a < 0 else rest).append(c)
    rest.extend(_combine(l, h, u) for l in lows for h in highs)
    return _simplify(rest)


def _solve(cons: list, vars_: list) -> Optional[dict]:
    if not vars_:
        return {} if all(c.holds({}) for c in cons) else None
    # Gaussian substitution on an equality first
    for c in cons:
        if c.rel == "==" and c.term.coeffs:
            u, a = c.term.coeffs[0]
            repl = LinearTerm(tuple((v, -b / a) for v, b in c.term.coeffs if v != u), -c.term.const / a)
            nxt = _simplify(LinearConstraint(d.term.substitute(u, repl), d.rel) for d in cons if d is not c)
            if nxt is None:
                return None
            w = _solve(nxt, [v for v in vars_ if v != u])
            if w is None:
                return None
            w[u] = repl.evaluate(_total(w, repl.unknowns))
            return w
    u = _pick_var(cons, vars_)
    lows, highs, rest = [], [], []
    for c in cons:
        a = c.term.coef(u)
        (highs if a > 0 else lows if a < 0 else rest).append(c)
    rest.extend(_combine(l, h, u) for l in lows for h in highs)
    nxt = _simplify(rest)
    if nxt is None:
        return None
    w = _solve(nxt, [v for v in vars_ if v != u])
    if w is None:
        return None
    w[u] = _choose(u, lows, highs, w)
    return w


def _total(w: dict, names) -> dict:
    for n in names:
        w.setdefault(n, ZERO)
    return w


def _choose(u: str, lows, highs, w: dict) -> Fraction:
    """Pick a value for ``u`` between its bounds under the partial witness ``w``."""
    lo = hi = None
    lo_strict = hi_strict = False
    for c in lows:
        a = c.term.coef(u)
        bound = -LinearTerm(tuple(p for p in c.term.coeffs if p[0] != u), c.term.const).evaluate(
            _total(w, c.term.unknowns)) / a
        if lo is None or bound > lo or (bound == lo and c.rel == "<"):
            lo, lo_strict = bound, c.rel == "<"
    for c in highs:
        a = c.term.coef(u)
        bound = -LinearTerm(tuple(p for p in c.term.coeffs if p[0] != u), c.term.const).evaluate(
            _total(w, c.term.unknowns)) / a
        if hi is None or bound < hi or (bound == hi and c.rel == "<"):
            hi, hi_strict = bound, c.rel == "<"
    if lo is not None and hi is not None:
        return lo if lo == hi else (lo + hi) / 2
    if lo is not None:
        return lo + 1 if lo_strict else lo
    if hi is not None:
        return hi - 1 if hi_strict else hi
    return ZERO


# --------------------------------------------------------------------------- public API


def feasible(system: LinearSystem) -> Feasibility:
    """SAT with a certificate-checked witness, or UNSAT."""
    cons = _simplify(system.constraints)
    if cons is None:
        return UNSAT
    used = {u for c in cons for u in c.unknowns}
    w = _solve(cons, [u for u in system.unknowns if u in used])
    if w is None:
        return UNSAT
    witness = {u: w.get(u, ZERO) for u in system.unknowns}
    if not check_witness(system, witness):
        raise CertificateError("reconstructed witness violates the system")
    return Feasibility(True, witness)


def is_feasible(constraints: Iterable[LinearConstraint]) -> bool:
    return feasible(LinearSystem.of(constraints)).sat


def eliminate(system: LinearSystem, u: str) -> LinearSystem:
    """Projection of the solution set onto the remaining unknowns."""
    if u not in system.unknowns:
        raise ValueError(f"unknown {u!r} is not declared")
    rest = tuple(v for v in system.unknowns if v != u)
    cons = eliminate_constraints(list(system.constraints), u)
    if cons is None:
        return LinearSystem(rest, (LinearConstraint(LinearTerm.constant(0), "<"),))
    return LinearSystem(rest, tuple(cons))


def project(system: LinearSystem, keep: Sequence[str]) -> LinearSystem:
    """Eliminate every unknown not in ``keep`` (equalities first, then greedy FM)."""
    keep_set = set(keep)
    cons = _simplify(system.constraints)
    if cons is None:
        return LinearSystem(tuple(keep), (LinearConstraint(LinearTerm.constant(0), "<"),))
    drop = [u for u in system.unknowns if u not in keep_set]
    while drop:
        eq = next((c for c in cons if c.rel == "==" and any(v in drop for v in c.unknowns)), None)
        if eq is not None:
            u = next(v for v in eq.unknowns if v in drop)
        else:
            u = _pick_var(cons, drop)
        cons = eliminate_constraints(cons, u)
        if cons is None:
            return LinearSystem(tuple(keep), (LinearConstraint(LinearTerm.constant(0), "<"),))
        drop.remove(u)
    return LinearSystem(tuple(keep), tuple(cons))


def implies(system: LinearSystem, c: LinearConstraint) -> bool:
    """Every solution of ``system`` satisfies ``c``."""
    return not any(is_feasible(system.constraints + (n,)) for n in c.negations())


def contains(outer: LinearSystem, inner: LinearSystem) -> bool:
    """Solution set of ``inner`` is a subset of that of ``outer``."""
    if not feasible(inner).sat:
        return True
    return all(implies(inner, c) for c in outer.constraints)


def remove_redundant(system: LinearSystem) -> LinearSystem:
    cons = list(system.constraints)
    i = 0
    while i < len(cons):
        c = cons[i]
        others = LinearSystem(system.unknowns, tuple(cons[:i] + cons[i + 1:]))
        if c.rel != "==" and implies(others, c):
            cons.pop(i)
        else:
            i += 1
    return LinearSystem(system.unknowns, tuple(cons))
