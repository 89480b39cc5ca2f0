"""Numerical laboratory for Anosov representations of hyperbolic groups."""

__version__ = "0.1.0"
