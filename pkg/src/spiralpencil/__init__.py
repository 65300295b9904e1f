"""Polynomial sections over the 2-sphere built from spiral zero sets.

The package measures how far pairs of degree-k sections stay from a common
zero (the ratio of min to max of ``|p|^2 + |q|^2``), evaluates the associated
bound constants, and checks equidistribution of fibers and branch points of
the rational map ``p/q``.
"""

__version__ = "0.1.0"
