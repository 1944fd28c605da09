"""Two-counter machines: textual format, validation and a reference interpreter."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..core import ModelError

_NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_INC = re.compile(rf"^({_NAME})\s*:\s*inc\s+({_NAME})\s*->\s*({_NAME})$")
_IFZ = re.compile(rf"^({_NAME})\s*:\s*ifz\s+({_NAME})\s*->\s*({_NAME})\s+else\s+dec\s*->\s*({_NAME})$")
_HDR = re.compile(rf"^(init|final)\s+({_NAME})$")
_CTR = re.compile(rf"^counters\s+({_NAME})\s*[, ]\s*({_NAME})$")


@dataclass(frozen=True)
class Inc:
    q: str
    c: str
    q1: str


@dataclass(frozen=True)
class IfzDec:
    """``q: if c = 0 goto zero else c := c - 1 goto nonzero``."""

    q: str
    c: str
    zero: str
    nonzero: str


@dataclass(frozen=True)
class MinskyMachine:
    states: tuple
    init: str
    final: str
    counters: tuple
    program: tuple  # Inc | IfzDec, at most one per state

    def __post_init__(self):
        if len(self.counters) != 2 or len(set(self.counters)) != 2:
            raise ModelError("a two-counter machine needs exactly two distinct counters")
        known = set(self.states)
        for q in (self.init, self.final):
            if q not in known:
                raise ModelError(f"unknown state {q!r}")
        seen = set()
        for ins in self.program:
            targets = (ins.q1,) if isinstance(ins, Inc) else (ins.zero, ins.nonzero)
            for q in (ins.q,) + targets:
                if q not in known:
                    raise ModelError(f"unknown state {q!r}")
            if ins.c not in self.counters:
                raise ModelError(f"unknown counter {ins.c!r}")
            if ins.q in seen:
                raise ModelError(f"state {ins.q!r} has more than one instruction")
            if ins.q == self.final:
                raise ModelError("the final state has no instructions")
            seen.add(ins.q)

    @property
    def instructions(self) -> tuple:
        """The tuple view ``(q, action, c, q')`` with ``action`` in ``inc``, ``dec``, ``0?``."""
        out = []
        for ins in self.program:
            if isinstance(ins, Inc):
                out.append((ins.q, "inc", ins.c, ins.q1))
            else:
                out.append((ins.q, "0?", ins.c, ins.zero))
                out.append((ins.q, "dec", ins.c, ins.nonzero))
        return tuple(out)

    def at(self, q: str):
        for ins in self.program:
            if ins.q == q:
                return ins
        return None

    @classmethod
    def build(cls, program, init: str, final: str, counters=("c", "d")) -> "MinskyMachine":
        states = [init, final]
        for ins in program:
            targets = (ins.q1,) if isinstance(ins, Inc) else (ins.zero, ins.nonzero)
            states.extend((ins.q,) + targets)
        return cls(tuple(dict.fromkeys(states)), init, final, tuple(counters), tuple(program))


def parse_machine(text: str) -> MinskyMachine:
    """Parse the line format: ``counters c d``, ``init q``, ``final q`` and one instruction per line."""
    init = final = None
    counters = ("c", "d")
    program = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _HDR.match(line):
            if m.group(1) == "init":
                init = m.group(2)
            else:
                final = m.group(2)
        elif m := _CTR.match(line):
            counters = (m.group(1), m.group(2))
        elif m := _INC.match(line):
            program.append(Inc(*m.groups()))
        elif m := _IFZ.match(line):
            program.append(IfzDec(*m.groups()))
        else:
            raise ModelError(f"line {no}: cannot parse {line!r}")
    if init is None or final is None:
        raise ModelError("machine needs both 'init' and 'final' lines")
    return MinskyMachine.build(program, init, final, counters)


def format_machine(m: MinskyMachine) -> str:
    lines = [f"counters {m.counters[0]} {m.counters[1]}", f"init {m.init}", f"final {m.final}"]
    for ins in m.program:
        if isinstance(ins, Inc):
            lines.append(f"{ins.q}: inc {ins.c} -> {ins.q1}")
        else:
            lines.append(f"{ins.q}: ifz {ins.c} -> {ins.zero} else dec -> {ins.nonzero}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MachineConfig:
    q: str
    v: tuple  # counter values in the order of MinskyMachine.counters

    def value(self, m: MinskyMachine, c: str) -> int:
        return self.v[m.counters.index(c)]


@dataclass
class MachineTrace:
    configs: list
    steps: list = field(default_factory=list)  # (q, action, c, q') taken
    accepted: bool = False
    halted: bool = False  # stopped before the step bound (accepted or stuck)

    @property
    def length(self) -> int:
        return len(self.steps)


def run_machine(m: MinskyMachine, max_steps: int) -> MachineTrace:
    """Deterministic execution from ``(init, 0, 0)`` for at most ``max_steps`` instructions."""
    cfg = MachineConfig(m.init, (0, 0))
    tr = MachineTrace([cfg])
    for _ in range(max_steps + 1):
        if cfg.q == m.final:
            tr.accepted = tr.halted = True
            return tr
        if len(tr.steps) == max_steps:
            break
        ins = m.at(cfg.q)
        if ins is None:
            tr.halted = True
            return tr
        i = m.counters.index(ins.c)
        v = list(cfg.v)
        if isinstance(ins, Inc):
            v[i] += 1
            step = (ins.q, "inc", ins.c, ins.q1)
        elif v[i] == 0:
            step = (ins.q, "0?", ins.c, ins.zero)
        else:
            v[i] -= 1
            step = (ins.q, "dec", ins.c, ins.nonzero)
        cfg = MachineConfig(step[3], tuple(v))
        tr.steps.append(step)
        tr.configs.append(cfg)
    return tr


CORPUS = {
    "inc_once": "init q0\nfinal qf\nq0: inc c -> qf\n",
    "already_zero": "init q0\nfinal qf\nq0: ifz c -> qf else dec -> q0\n",
    "inc_forever": "init q0\nfinal qf\nq0: inc c -> q0\n",
    "inc3_dec3": """init q0
final qf
q0: inc c -> q1
q1: inc c -> q2
q2: inc c -> q3
q3: ifz c -> qf else dec -> q3
""",
    "transfer": """init q0
final qf
q0: inc c -> q1
q1: inc c -> q2
q2: ifz c -> q4 else dec -> q3
q3: inc d -> q2
q4: ifz d -> qf else dec -> q4
""",
    "double": """init q0
final qf
q0: inc c -> q1
q1: inc c -> q2
q2: ifz c -> q5 else dec -> q3
q3: inc d -> q4
q4: inc d -> q2
q5: ifz d -> qf else dec -> q5
""",
    "ping_pong": """init q0
final qf
q0: inc c -> q1
q1: ifz c -> q3 else dec -> q2
q2: inc d -> q1
q3: ifz d -> q0 else dec -> q3
""",
    "count_to_four": """init q0
final qf
q0: inc d -> q1
q1: inc d -> q2
q2: inc d -> q3
q3: inc d -> q4
q4: ifz d -> qf else dec -> q5
q5: inc c -> q4
""",
    "stuck": "init q0\nfinal qf\nq0: inc c -> q1\n",
    "zero_both": """init q0
final qf
q0: ifz c -> q1 else dec -> q0
q1: ifz d -> qf else dec -> q1
""",
    "inc_dec_loop": """init q0
final qf
q0: inc c -> q1
q1: ifz c -> q0 else dec -> q0
""",
    "alternate": """init q0
final qf
q0: inc c -> q1
q1: inc d -> q2
q2: ifz c -> qf else dec -> q3
q3: ifz d -> qf else dec -> q2
""",
}


def corpus() -> dict:
    return {name: parse_machine(src) for name, src in CORPUS.items()}
