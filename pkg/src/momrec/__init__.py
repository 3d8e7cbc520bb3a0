"""Reconstruction of piecewise-polynomial functions and planar domains from power moments."""

__version__ = "0.1.0"
