"""Co-simulation of a machine with its compiled automaton.

The automaton is driven along its canonical run (earliest event first, with the
machine trace deciding each branch) and the counter encoding is compared with
the machine's configuration at every tick or instruction boundary, exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..core import Run, State, time_step
from .minsky import MachineTrace, run_machine
from .negrates import Compiled
from .simulate import drive


@dataclass(frozen=True)
class EncodingCheck:
    step: int          # tick index (negative rates) or instruction index (diagonal)
    quantity: str      # "time", a variable name, or "|x-y|" for an auxiliary counter
    expected: Fraction
    observed: Fraction

    @property
    def passed(self) -> bool:
        return self.expected == self.observed


@dataclass
class CosimReport:
    checks: list
    run: Run
    trace: MachineTrace
    reached_goal: bool
    budget: Fraction
    rounds: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def duration(self) -> Fraction:
        return self.run.duration

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "target": self.run.automaton.name,
            "machine_steps": self.trace.length,
            "machine_accepts": self.trace.accepted,
            "reached_goal": self.reached_goal,
            "duration": str(self.duration),
            "budget": str(self.budget),
            "all_passed": self.ok,
            "checks": [{"step": c.step, "quantity": c.quantity, "expected": str(c.expected),
                        "observed": str(c.observed), "pass": c.passed} for c in self.checks],
        }


def _branch(step) -> str:
    return {"inc": "inc", "0?": "zero", "dec": "dec"}[step[1]]


def cosimulate(compiled: Compiled, n_steps: int, init_rounds: Optional[int] = None) -> CosimReport:
    """Follow at most ``n_steps`` machine instructions and check the encoding after each."""
    if compiled.target == "negrates":
        return _cosim_negrates(compiled, n_steps)
    return _cosim_diagonal(compiled, n_steps, init_rounds)


# --------------------------------------------------------------------------- negative rates


def _cosim_negrates(cp: Compiled, n: int) -> CosimReport:
    m, h = cp.machine, cp.automaton
    trace = run_machine(m, n)
    plan = [(s[0], _branch(s)) for s in trace.steps]

    def choose(s, steps, out):
        i = sum(1 for st in steps if st.edge in cp.tags)
        return [e for e in out if e not in cp.tags or (i < len(plan) and cp.tags[e][1:] == plan[i])]

    run = drive(h, choose, lambda s, steps: s.loc == cp.goal)
    times = _times(run)
    # tick edges reset nothing, so the post-edge state is the state at the tick instant
    ticks = [(times[k], run.states[k + 1]) for k, st in enumerate(run.steps) if st.edge in cp.tags]
    last = run.last
    if last.loc == cp.goal and len(ticks) == len(plan):
        # the goal is entered at the tick instant that follows the last instruction
        ticks.append((run.duration, last))
    elif last.loc.startswith("B.") and len(ticks) == len(plan):
        # the machine has stopped; wait for the next tick instant to check once more
        t = last.valuation["y_t"] / 2
        ticks.append((run.duration + t, time_step(h, last, t)))
    checks = []
    for i, (t, s) in enumerate(ticks):
        checks.append(EncodingCheck(i, "time", 1 - Fraction(1, 4 ** i), t))
        checks.append(EncodingCheck(i, "x_t", Fraction(1, 4 ** i), s.valuation["x_t"]))
        for ctr, val in zip(m.counters, trace.configs[i].v):
            checks.append(EncodingCheck(i, f"x_{ctr}", Fraction(1, 4 ** (i + val)), s.valuation[f"x_{ctr}"]))
    reached = last.loc == cp.goal
    if trace.accepted and not reached:
        checks.append(EncodingCheck(len(plan), "goal", Fraction(1), Fraction(0)))
    return CosimReport(checks, run, trace, reached, Fraction(1))


def _times(run: Run) -> list:
    """Time at which each step's edge fires."""
    out, acc = [], Fraction(0)
    for st in run.steps:
        acc += st.delay
        out.append(acc)
    return out


# --------------------------------------------------------------------------- diagonal


@dataclass(frozen=True)
class Round:
    counter: str
    kind: str           # "inc" or "maintain"
    start: Fraction
    end: Fraction
    before: tuple       # (x, y, z, w) at the round start
    after: tuple

    @property
    def duration(self) -> Fraction:
        return self.end - self.start


def round_log(cp: Compiled, run: Run) -> list:
    """Every completed round of every auxiliary counter along ``run``."""
    from .diagonal import aux_counters

    auxs = aux_counters(cp.machine)
    times = _times(run)
    open_: dict = {}
    out = []

    def vals(s: State, a: str) -> tuple:
        return tuple(s.valuation[f"{k}_{a}"] for k in "xyzw")

    for k, st in enumerate(run.steps):
        tag = cp.tags.get(st.edge)
        post, t = run.states[k + 1], times[k]
        if tag is None:
            continue
        if tag[0] in ("entry", "init-back"):
            for a in auxs:
                if tag[0] == "init-back" and a in open_:
                    s0, t0, kind = open_[a]
                    out.append(Round(a, kind, t0, t, s0, vals(post, a)))
            open_.update({a: (vals(post, a), t, None) for a in auxs})
        elif tag[0] == "init-inc":
            for a in auxs:
                s0, t0, _ = open_[a]
                open_[a] = (s0, t0, "inc")
        elif tag[0] == "start-half":
            s0, t0, _ = open_[tag[1]]
            open_[tag[1]] = (s0, t0, tag[2])
        elif tag[0] == "round-end":
            a = tag[1]
            s0, t0, kind = open_[a]
            out.append(Round(a, kind, t0, t, s0, vals(post, a)))
            open_[a] = (vals(post, a), t, None)
    return out


def _cosim_diagonal(cp: Compiled, n: int, init_rounds: Optional[int]) -> CosimReport:
    from .diagonal import aux_counters

    m, h = cp.machine, cp.automaton
    trace = run_machine(m, n)
    plan = [(s[0], _branch(s)) for s in trace.steps]
    if cp.init is None and init_rounds is None:
        raise ValueError("the looping initialization needs an explicit number of init rounds")
    k0 = cp.init if cp.init is not None else init_rounds
    auxs = aux_counters(m)

    seen = {"n": 0, "end": 0, "init-inc": 0}

    def choose(s, steps, out):
        for st in steps[seen["n"]:]:
            kind = cp.tags.get(st.edge, ("",))[0]
            if kind in seen:
                seen[kind] += 1
        seen["n"] = len(steps)
        i, done_init = seen["end"], seen["init-inc"]
        allowed = []
        for e in out:
            tag = cp.tags.get(e)
            if tag is None or tag[0] in ("entry", "start-half", "round-end", "init-back"):
                allowed.append(e)
            elif tag[0] == "init-inc" and done_init < k0:
                allowed.append(e)
            elif tag[0] == "init-done" and done_init == k0:
                allowed.append(e)
            elif tag[0] in ("branch", "end") and i < len(plan) and tag[1:] == plan[i]:
                allowed.append(e)
        return allowed

    run = drive(h, choose, lambda s, steps: s.loc == cp.goal)
    checks = []
    boundary_idx = [k for k, st in enumerate(run.steps) if cp.tags.get(st.edge, ("",))[0] in ("init-done", "end")
                    or (cp.tags.get(st.edge, ("",))[0] == "entry" and cp.init is not None)]
    for i, k in enumerate(boundary_idx):
        s = run.states[k + 1]
        counts = _aux_values(m, trace, i, k0)
        for a in auxs:
            x, y = s.valuation[f"x_{a}"], s.valuation[f"y_{a}"]
            checks.append(EncodingCheck(i, f"|x-y| {a}", Fraction(1, 2 ** counts[a]), abs(x - y)))
            for kind in "yzw":
                checks.append(EncodingCheck(i, f"{kind}_{a}", Fraction(0), s.valuation[f"{kind}_{a}"]))
    reached = run.last.loc == cp.goal
    if trace.accepted and not reached:
        checks.append(EncodingCheck(len(plan), "goal", Fraction(1), Fraction(0)))
    budget = Fraction(3) if cp.init is None else Fraction(1)
    return CosimReport(checks, run, trace, reached, budget, round_log(cp, run))


def _aux_values(m, trace: MachineTrace, i: int, k0: int) -> dict:
    """Auxiliary counter values after ``i`` machine steps."""
    vals = {f"{c}_{s}": k0 for c in m.counters for s in ("bot", "top")}
    for q, act, c, _ in trace.steps[:i]:
        if act == "inc":
            vals[f"{c}_top"] += 1
        elif act == "dec":
            vals[f"{c}_bot"] += 1
    return vals
