"""Topological dynamical decoupling on square lattices."""

__version__ = "0.1.0"
