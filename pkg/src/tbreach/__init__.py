"""Time-bounded reachability for rectangular hybrid automata with non-negative rates."""

__version__ = "0.1.0"
