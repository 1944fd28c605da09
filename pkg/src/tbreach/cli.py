"""Command-line entry point.

Exit codes: 0 success or YES, 1 NO (or a rejected simulation), 2 automaton outside the
decidable class, 3 parse error. ``TBREACH_JOBS`` sets the number of worker processes used
by ``check``; unset means single-threaded.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .contraction import cnt, cnt_star, contraction
from .core import ModelError, State, StepRejected, frac, replay
from .decide import Query, decide_tb_reach
from .dsl import ParseError, parse_model, print_model
from .jsonio import path_from_json, path_to_json, run_to_json
from .normalize import OutOfClass, cbound, check_class, dreset, h3_violations, normalize_pipeline
from .oracle import oracle_reach
from .reductions import compile_diagonal, compile_negrates, cosimulate, parse_machine

EXIT_YES, EXIT_NO, EXIT_CLASS, EXIT_PARSE = 0, 1, 2, 3


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _model(path: str):
    try:
        return parse_model(_read(path))
    except ParseError as err:
        raise _Exit(EXIT_PARSE, "\n".join(f"{path}:{d}" for d in err.diagnostics)) from None


def _machine(path: str):
    try:
        return parse_machine(_read(path))
    except ModelError as err:
        raise _Exit(EXIT_PARSE, f"{path}: {err}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def cmd_check(a) -> int:
    h = _model(a.model)
    t0 = time.perf_counter()
    try:
        v = decide_tb_reach(Query(h, a.goal, frac(a.bound)))
    except OutOfClass as err:
        raise _Exit(EXIT_CLASS, f"rejected: {err}") from None
    except ModelError as err:
        raise _Exit(EXIT_PARSE, str(err)) from None
    elapsed = time.perf_counter() - t0
    print("YES" if v.reachable else "NO")
    if v.reachable:
        print(f"witness: {len(v.witness.steps)} steps, duration {v.witness.duration}")
        if a.emit_witness:
            Path(a.emit_witness).write_text(_dump(run_to_json(v.witness)) + "\n")
    if a.oracle:
        o = oracle_reach(h, a.goal, frac(a.bound))
        verdict = {True: "YES", False: "NO", None: "UNKNOWN (depth cap)"}[o]
        print(f"oracle: {verdict}")
        if o is not None and o != v.reachable:
            print("oracle disagrees", file=sys.stderr)
    if a.verbose:
        print(f"nodes: {v.stats.get('nodes', 0)}, time: {elapsed:.3f}s", file=sys.stderr)
    return EXIT_YES if v.reachable else EXIT_NO


def cmd_normalize(a) -> int:
    h = _model(a.model)
    try:
        check_class(h)
    except OutOfClass as err:
        raise _Exit(EXIT_CLASS, f"rejected: {err}") from None
    if a.stage == "dreset":
        out = dreset(h).automaton
    elif a.stage == "cbound":
        out = cbound(dreset(h).automaton).automaton
    else:
        out = normalize_pipeline(h, a.goal or h.init, materialize=True).strict_automaton().automaton
        bad = h3_violations(out)
        if bad:
            print(f"warning: {len(bad)} edges violate the strict-guard form", file=sys.stderr)
    sys.stdout.write(print_model(out))
    return EXIT_YES


def cmd_contract(a) -> int:
    h = _model(a.model)
    path = path_from_json(json.loads(_read(a.path)))
    try:
        if a.mode == "cnt":
            out, report = cnt(h, path), None
        elif a.mode == "cnt-star":
            out, report = cnt_star(h, path)
        else:
            out, report = contraction(h, path)
    except ModelError as err:
        raise _Exit(EXIT_NO, str(err)) from None
    doc = {"path": path_to_json(h, out), "input_length": len(path), "output_length": len(out)}
    if report is not None:
        doc.update(iterations=report.iterations, positions=[list(p) for p in report.positions],
                   bound_L=report.bound_L, bound_K_seg=report.bound_K_seg,
                   landmarks=[list(p) for p in report.landmarks])
    print(_dump(doc))
    return EXIT_YES


def cmd_simulate(a) -> int:
    h = _model(a.model)
    path = path_from_json(json.loads(_read(a.path)))
    try:
        run = replay(h, State.initial(h), path)
    except (StepRejected, ModelError) as err:
        print(_dump({"ok": False, "error": str(err)}))
        return EXIT_NO
    print(_dump({"ok": True, "run": run_to_json(run), "final": run.last.loc}))
    return EXIT_YES


def _compile(m, target: str, init):
    return compile_negrates(m) if target == "negrates" else compile_diagonal(m, init)


def cmd_compile(a) -> int:
    m = _machine(a.machine)
    cp = _compile(m, a.target, a.init)
    sys.stdout.write(f"// goal: {cp.goal}\n")
    sys.stdout.write(print_model(cp.automaton))
    return EXIT_YES


def cmd_cosim(a) -> int:
    m = _machine(a.machine)
    cp = _compile(m, a.target, a.init)
    if a.target == "diagonal" and a.init is None and a.init_rounds is None:
        raise _Exit(EXIT_PARSE, "diagonal co-simulation needs --init or --init-rounds")
    report = cosimulate(cp, a.steps, a.init_rounds)
    print(_dump(report.to_json()))
    return EXIT_YES if report.ok else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tbreach", description="Time-bounded reachability for rectangular hybrid automata.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide whether a location is reachable within a time bound")
    c.add_argument("model")
    c.add_argument("goal")
    c.add_argument("--bound", "-T", required=True, help="time bound, e.g. 1 or 139/250")
    c.add_argument("--emit-witness", metavar="PATH", help="write the witness run as JSON")
    c.add_argument("--oracle", action="store_true", help="also run the bounded-depth reference search")
    c.add_argument("--verbose", "-v", action="store_true")
    c.set_defaults(func=cmd_check)

    n = sub.add_parser("normalize", help="print a normalization stage as a model")
    n.add_argument("model")
    n.add_argument("--stage", choices=("dreset", "cbound", "strict"), default="strict")
    n.add_argument("--goal")
    n.set_defaults(func=cmd_normalize)

    k = sub.add_parser("contract", help="contract a timed path given as JSON")
    k.add_argument("model")
    k.add_argument("path")
    k.add_argument("--mode", choices=("cnt", "cnt-star", "contraction"), default="contraction")
    k.set_defaults(func=cmd_contract)

    s = sub.add_parser("simulate", help="replay a timed path given as JSON")
    s.add_argument("model")
    s.add_argument("path")
    s.set_defaults(func=cmd_simulate)

    for name, func, help_ in (("compile-minsky", cmd_compile, "compile a two-counter machine to a model"),
                              ("cosim", cmd_cosim, "co-simulate a machine and its compiled automaton")):
        m = sub.add_parser(name, help=help_)
        m.add_argument("machine")
        m.add_argument("--target", choices=("negrates", "diagonal"), default="negrates")
        m.add_argument("--init", type=int, help="diagonal target: fixed initial auxiliary counter value")
        if name == "cosim":
            m.add_argument("--steps", type=int, default=8)
            m.add_argument("--init-rounds", type=int, help="diagonal target: rounds of the initialization loop")
        m.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as err:
        if str(err):
            print(str(err), file=sys.stderr)
        return err.code
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
