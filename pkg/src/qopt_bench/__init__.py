"""Max-Cut benchmark harness for QAOA and quantum annealing on desk-scale simulators."""

__version__ = "0.1.0"
