"""Exact noncommutative differential forms, cyclic homology and
free-product deformation calculus."""

__version__ = "0.1.0"
