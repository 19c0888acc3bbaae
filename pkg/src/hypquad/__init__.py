"""Numerical laboratory for Hamiltonians equal to a hyperbolic quadratic form at infinity."""

__version__ = "0.1.0"
