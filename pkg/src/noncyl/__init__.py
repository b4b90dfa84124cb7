"""Solver and verification harness for doubly nonlinear parabolic systems on time-varying domains."""

__version__ = "0.1.0"
