"""Cycle contraction of timed paths and the associated length bounds."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import Automaton, TimedStep, check_chain, step_rates


def bound_cnt_star(n_locs: int, n_edges: int) -> int:
    """Maximal length of a path with at most one occurrence of each simple cycle."""
    return n_locs * (2 ** (n_edges + 1) + 1)


def bound_segment(n_vars: int, n_locs: int, n_edges: int) -> int:
    return 2 * n_vars + (2 * n_vars + 1) * bound_cnt_star(n_locs, n_edges)


@dataclass
class ContractionReport:
    input_length: int
    output_length: int = 0
    iterations: int = 0
    positions: list = field(default_factory=list)  # 1-based (j, k, j', k') per applied step
    bound_L: int = 0
    bound_K_seg: int = 0
    landmarks: list = field(default_factory=list)  # (input position, output position), 1-based


@dataclass(frozen=True)
class ResetLandmarks:
    """Per variable: positions (1-based) of the first and last edge resetting it."""

    positions: dict

    def of(self, var: str) -> frozenset:
        return self.positions.get(var, frozenset())

    def union(self) -> list:
        return sorted(set().union(*self.positions.values()))


def is_simple_cycle(h: Automaton, edges: Sequence[str]) -> bool:
    if not edges:
        return False
    es = [h.edge(e) for e in edges]
    srcs = [e.src for e in es]
    return es[-1].trg == es[0].src and len(set(srcs)) == len(srcs)


def find_cycle_pair(h: Automaton, path: Sequence[TimedStep]) -> Optional[tuple]:
    """Lexicographically least 0-based ``(j, k, j2, k2)`` with equal simple cycles, or ``None``."""
    names = [s.edge for s in path]
    n = len(names)
    limit = len(h.locations)
    for j in range(n):
        for k in range(j, min(n, j + limit)):
            cyc = names[j:k + 1]
            if not is_simple_cycle(h, cyc):
                continue
            size = k - j + 1
            for j2 in range(k + 1, n - size + 1):
                if names[j2:j2 + size] == cyc:
                    return j, k, j2, j2 + size - 1
    return None


def _merge(h: Automaton, a: TimedStep, b: TimedStep) -> TimedStep:
    t = a.delay + b.delay
    if a.rates is None and b.rates is None:
        return TimedStep(t, a.edge, None, a.resets)
    ra, rb = step_rates(h, a), step_rates(h, b)
    if t == 0:
        rates = ra
    else:
        # duration-weighted average keeps each variable's effect
        rates = {v: (ra[v] * a.delay + rb[v] * b.delay) / t for v in ra}
    return TimedStep(t, a.edge, rates, a.resets)


def cnt(h: Automaton, path: Sequence[TimedStep]) -> tuple:
    path = tuple(path)
    found = find_cycle_pair(h, path)
    if found is None:
        return path
    return _apply(h, path, found)


def _apply(h, path, found):
    j, k, j2, k2 = found
    merged = tuple(_merge(h, path[j + i], path[j2 + i]) for i in range(k - j + 1))
    return path[:j] + merged + path[k + 1:j2] + path[k2 + 1:]


def cnt_star(h: Automaton, path: Sequence[TimedStep]):
    path = tuple(path)
    check_chain(h, path)
    report = ContractionReport(len(path), bound_L=bound_cnt_star(len(h.locations), len(h.edges)),
                               bound_K_seg=bound_segment(len(h.vars), len(h.locations), len(h.edges)))
    while True:
        found = find_cycle_pair(h, path)
        if found is None:
            break
        path = _apply(h, path, found)
        report.iterations += 1
        report.positions.append(tuple(p + 1 for p in found))
    report.output_length = len(path)
    return path, report


def reset_landmarks(h: Automaton, path: Sequence[TimedStep]) -> ResetLandmarks:
    first: dict = {}
    last: dict = {}
    for pos, step in enumerate(path, start=1):
        for v in h.edge(step.edge).reset.vars:
            first.setdefault(v, pos)
            last[v] = pos
    return ResetLandmarks({v: frozenset({first[v], last[v]}) for v in first})


def contraction(h: Automaton, path: Sequence[TimedStep]):
    """Contract each segment between reset landmarks; landmark steps are kept verbatim."""
    path = tuple(path)
    check_chain(h, path)
    marks = reset_landmarks(h, path).union()
    report = ContractionReport(len(path), bound_L=bound_cnt_star(len(h.locations), len(h.edges)),
                               bound_K_seg=bound_segment(len(h.vars), len(h.locations), len(h.edges)))
    out: list = []
    start = 0
    for m in marks + [len(path) + 1]:
        seg, rep = cnt_star(h, path[start:m - 1])
        offset = start
        report.iterations += rep.iterations
        report.positions.extend(tuple(p + offset for p in q) for q in rep.positions)
        out.extend(seg)
        if m <= len(path):
            out.append(path[m - 1])
            report.landmarks.append((m, len(out)))
        start = m
    report.output_length = len(out)
    return tuple(out), report


def prefix_durations(path: Sequence[TimedStep], positions) -> list:
    """Duration from the path start up to and including step ``p`` (1-based) for each ``p``."""
    acc, cum = Fraction(0), [Fraction(0)]
    for s in path:
        acc += s.delay
        cum.append(acc)
    return [cum[p] for p in positions]
