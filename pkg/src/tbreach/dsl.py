"""Text format for automata.

Example::

    automaton fig1;
    var x, y;
    init l0;
    loc l0 { rate x = 5; rate y = 2; inv x <= 1 && y <= 1; }
    edge e01: l0 -> l1 { guard x == 1; reset x := 0; }

Names that are not plain identifiers (or clash with keywords) are written in
double quotes. Rationals are written ``num/den``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (FALSE, TRUE, Automaton, Diag, Edge, Guard, Interval, Location, ModelError, Rect,
                   Reset)

KEYWORDS = frozenset({"automaton", "var", "init", "loc", "edge", "rate", "inv", "guard", "reset",
                      "in", "true", "false", "inf"})

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|\#[^\n]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<num>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_.']*)
  | (?P<op>->|:=|&&|<=|>=|==|[;,{}\[\]()<>=:+\-])
""", re.VERBOSE)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*\Z")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError([Diagnostic(line, pos - line_start + 1, f"unexpected character {src[pos]!r}")])
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            text = m.group()
            if kind == "str":
                text = bytes(text[1:-1], "utf-8").decode("unicode_escape")
            out.append(Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError([Diagnostic(tok.line, tok.col, msg)])

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "name")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self, what: str = "name") -> Token:
        t = self.tok
        if t.kind == "str" or (t.kind == "name" and t.text not in KEYWORDS):
            self.i += 1
            return t
        self.fail(f"expected {what}, found {t.text or 'end of input'!r}")

    def number(self) -> Fraction:
        neg = self.accept("-")
        t = self.tok
        if t.kind != "num":
            self.fail(f"expected a number, found {t.text or 'end of input'!r}")
        self.i += 1
        num, _, den = t.text.partition("/")
        if den and int(den) == 0:
            self.fail("zero denominator", t)
        v = Fraction(int(num), int(den) if den else 1)
        return -v if neg else v

    def bound(self):
        """Returns a number or ``None`` for an infinite endpoint, with the sign of infinity."""
        if self.at("-") and self.toks[self.i + 1].text == "inf":
            self.i += 2
            return None, -1
        if self.accept("+"):
            self.expect("inf")
            return None, 1
        if self.accept("inf"):
            return None, 1
        return self.number(), 0

    def interval(self) -> Interval:
        start = self.tok
        if self.accept("["):
            lo_c = True
        elif self.accept("("):
            lo_c = False
        else:
            self.fail("expected '[' or '(' to open an interval")
        lo, lo_inf = self.bound()
        self.expect(",")
        hi, hi_inf = self.bound()
        if self.accept("]"):
            hi_c = True
        elif self.accept(")"):
            hi_c = False
        else:
            self.fail("expected ']' or ')' to close an interval")
        if lo_inf > 0 or hi_inf < 0:
            self.fail("malformed interval: infinite endpoint on the wrong side", start)
        if (lo is None and lo_c) or (hi is None and hi_c):
            self.fail("malformed interval: an infinite endpoint must be open", start)
        return Interval(lo, hi, lo_c, hi_c)

    # -- grammar
    def model(self) -> Automaton:
        self.expect("automaton")
        name = self.name("automaton name").text
        self.expect(";")
        vars_: Optional[list] = None
        var_pos: dict = {}
        init = None
        locs: list = []
        loc_names: dict = {}
        edges: list = []
        edge_names: set = set()
        pending_checks: list = []
        while self.tok.kind != "eof":
            t = self.tok
            if self.accept("var"):
                if vars_ is not None:
                    self.fail("duplicate 'var' declaration", t)
                vars_ = []
                if not self.at(";"):
                    while True:
                        vt = self.name("variable name")
                        if vt.text in var_pos:
                            self.fail(f"duplicate variable {vt.text!r}", vt)
                        var_pos[vt.text] = vt
                        vars_.append(vt.text)
                        if not self.accept(","):
                            break
                self.expect(";")
            elif self.accept("init"):
                if init is not None:
                    self.fail("duplicate 'init' declaration", t)
                init = self.name("location name")
                self.expect(";")
            elif self.accept("loc"):
                lt = self.name("location name")
                if lt.text in loc_names:
                    self.fail(f"duplicate location {lt.text!r}", lt)
                loc_names[lt.text] = lt
                locs.append(self.loc_body(lt, vars_ or [], var_pos))
            elif self.accept("edge"):
                edges.append(self.edge_body(t, len(edges), edge_names, var_pos, pending_checks))
            else:
                self.fail(f"expected a declaration, found {t.text!r}")
        if init is None:
            self.fail("missing 'init' declaration")
        if init.text not in loc_names:
            self.fail(f"unknown initial location {init.text!r}", init)
        for tok in pending_checks:
            if tok.text not in loc_names:
                self.fail(f"unknown location {tok.text!r}", tok)
        try:
            return Automaton(name, tuple(vars_ or ()), tuple(locs), tuple(edges), init.text)
        except ModelError as exc:
            self.fail(str(exc), init)

    def check_var(self, tok: Token, var_pos: dict) -> str:
        if tok.text not in var_pos:
            self.fail(f"unknown variable {tok.text!r}", tok)
        return tok.text

    def loc_body(self, lt: Token, vars_: list, var_pos: dict) -> Location:
        self.expect("{")
        rates: dict = {}
        inv = TRUE
        while not self.accept("}"):
            t = self.tok
            if self.accept("rate"):
                vt = self.name("variable name")
                v = self.check_var(vt, var_pos)
                if v in rates:
                    self.fail(f"duplicate rate for {v!r}", vt)
                if self.accept("in"):
                    start = self.tok
                    iv = self.interval()
                    if iv.is_empty():
                        self.fail("empty rate interval", start)
                elif self.accept("=") or self.accept("=="):
                    iv = Interval.point(self.number())
                else:
                    self.fail("expected 'in' or '=' after rate variable")
                rates[v] = iv
                self.expect(";")
            elif self.accept("inv"):
                inv = Guard.of(inv, self.guard(var_pos))
                self.expect(";")
            else:
                self.fail(f"expected 'rate', 'inv' or '}}', found {t.text or 'end of input'!r}")
        row = tuple((v, rates.get(v, Interval.point(0))) for v in vars_)
        return Location(lt.text, row, inv)

    def edge_body(self, start: Token, index: int, names: set, var_pos: dict, pending: list) -> Edge:
        first = self.name("edge or location name")
        if self.accept(":"):
            ename = first
            src = self.name("location name")
        else:
            ename, src = None, first
        self.expect("->")
        trg = self.name("location name")
        pending.extend([src, trg])
        name = ename.text if ename else f"e{index}"
        if name in names:
            self.fail(f"duplicate edge name {name!r}", ename or start)
        names.add(name)
        guard, resets = TRUE, []
        self.expect("{")
        while not self.accept("}"):
            t = self.tok
            if self.accept("guard"):
                guard = Guard.of(guard, self.guard(var_pos))
                self.expect(";")
            elif self.accept("reset"):
                while True:
                    vt = self.name("variable name")
                    v = self.check_var(vt, var_pos)
                    if any(v == r for r, _ in resets):
                        self.fail(f"duplicate reset of {v!r}", vt)
                    self.expect(":=")
                    if self.at("[") or self.at("("):
                        it = self.tok
                        iv = self.interval()
                        if iv.is_empty():
                            self.fail("empty reset interval", it)
                    else:
                        iv = Interval.point(self.number())
                    resets.append((v, iv))
                    if not self.accept(","):
                        break
                self.expect(";")
            else:
                self.fail(f"expected 'guard', 'reset' or '}}', found {t.text or 'end of input'!r}")
        return Edge(name, src.text, trg.text, guard, Reset(tuple(resets)))

    def guard(self, var_pos: dict) -> Guard:
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        atoms = [self.atom(var_pos)]
        while self.accept("&&"):
            atoms.append(self.atom(var_pos))
        return Guard.of(atoms)

    def atom(self, var_pos: dict):
        xt = self.name("variable name")
        x = self.check_var(xt, var_pos)
        if self.accept("in"):
            return Rect(x, self.interval())
        if self.accept("-"):
            yt = self.name("variable name")
            y = self.check_var(yt, var_pos)
            rel = self.relation()
            return Diag(x, y, rel, self.number())
        rel = self.relation()
        return Rect(x, Interval.from_relation(rel, self.number()))

    def relation(self) -> str:
        t = self.tok
        for op in ("<=", ">=", "==", "<", ">"):
            if self.accept(op):
                return op
        if self.accept("="):
            return "=="
        self.fail(f"expected a comparison operator, found {t.text or 'end of input'!r}")


def parse_model(src: str) -> Automaton:
    """Parse model text; raises :class:`ParseError` carrying positioned diagnostics."""
    return _Parser(src).model()


# --------------------------------------------------------------------------- printing


def format_name(name: str) -> str:
    if _IDENT.match(name) and name not in KEYWORDS:
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def format_number(v: Fraction) -> str:
    return str(v)


def format_interval(iv: Interval) -> str:
    lo = "-inf" if iv.lo is None else format_number(iv.lo)
    hi = "inf" if iv.hi is None else format_number(iv.hi)
    return f"{'[' if iv.lo_closed else '('}{lo}, {hi}{']' if iv.hi_closed else ')'}"


def format_atom(a) -> str:
    if isinstance(a, Diag):
        return f"{format_name(a.x)} - {format_name(a.y)} {a.rel} {format_number(a.const)}"
    iv, x = a.interval, format_name(a.var)
    if iv.is_singular():
        return f"{x} == {format_number(iv.lo)}"
    if iv.lo is None and iv.hi is not None:
        return f"{x} {'<=' if iv.hi_closed else '<'} {format_number(iv.hi)}"
    if iv.hi is None and iv.lo is not None:
        return f"{x} {'>=' if iv.lo_closed else '>'} {format_number(iv.lo)}"
    return f"{x} in {format_interval(iv)}"


def format_guard(g: Guard) -> str:
    if g.is_false:
        return "false"
    if g.is_true:
        return "true"
    return " && ".join(format_atom(a) for a in g.atoms)


def print_model(h: Automaton) -> str:
    lines = [f"automaton {format_name(h.name)};"]
    lines.append("var " + ", ".join(format_name(v) for v in h.vars) + ";" if h.vars else "var;")
    lines.append(f"init {format_name(h.init)};")
    for loc in h.locations:
        body = []
        for v, iv in loc.rates:
            if iv.is_singular():
                body.append(f"rate {format_name(v)} = {format_number(iv.lo)};")
            else:
                body.append(f"rate {format_name(v)} in {format_interval(iv)};")
        if not loc.invariant.is_true:
            body.append(f"inv {format_guard(loc.invariant)};")
        lines.append(f"loc {format_name(loc.name)} {{ {' '.join(body)} }}" if body
                     else f"loc {format_name(loc.name)} {{ }}")
    for e in h.edges:
        body = []
        if not e.guard.is_true:
            body.append(f"guard {format_guard(e.guard)};")
        if e.reset:
            parts = []
            for v, iv in e.reset.entries:
                val = format_number(iv.lo) if iv.is_singular() else format_interval(iv)
                parts.append(f"{format_name(v)} := {val}")
            body.append("reset " + ", ".join(parts) + ";")
        inner = f" {' '.join(body)} " if body else " "
        lines.append(f"edge {format_name(e.name)}: {format_name(e.src)} -> {format_name(e.trg)} {{{inner}}}")
    return "\n".join(lines) + "\n"
