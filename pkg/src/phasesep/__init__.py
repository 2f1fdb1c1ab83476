"""Numerical laboratory for the phase-separation system du = u v^2, dv = v u^2."""

__version__ = "0.1.0"
