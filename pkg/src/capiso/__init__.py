"""Numerical verification of quantitative isoperimetric inequalities in
capillarity problems and convex cones."""

__version__ = "0.1.0"
