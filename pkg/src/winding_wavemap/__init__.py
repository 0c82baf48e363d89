"""Numerical laboratory for winding energy concentration of quasi-equivariant
wave maps into a warped-product torus-sphere target."""

__version__ = "0.1.0"
