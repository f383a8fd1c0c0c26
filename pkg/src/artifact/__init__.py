"""Elliptic, Hecke and monodromy computations for the two-singularity curvature equation on flat tori."""
__version__ = "0.1.0"
