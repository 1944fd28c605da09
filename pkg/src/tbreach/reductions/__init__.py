"""Two-counter machine reductions: the interpreter, two compilers and their co-simulator."""
from .cosim import CosimReport, EncodingCheck, Round, cosimulate, round_log
from .diagonal import compile_diagonal
from .minsky import IfzDec, Inc, MachineConfig, MachineTrace, MinskyMachine, corpus, parse_machine, run_machine
from .negrates import Compiled, compile_negrates, division_gadget

__all__ = ["CosimReport", "EncodingCheck", "Round", "cosimulate", "round_log", "compile_diagonal", "IfzDec", "Inc",
           "MachineConfig", "MachineTrace", "MinskyMachine", "corpus", "parse_machine", "run_machine", "Compiled",
           "compile_negrates", "division_gadget"]
