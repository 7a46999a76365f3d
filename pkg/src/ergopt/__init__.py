"""Exact toolkit for ergodic optimization on subshifts of finite type.

Computes the optimal average value of a locally constant potential over
holonomic (prepend-invariant) measures, together with the certifying objects:
maximizing measures, sub-actions, the least-path-cost matrix, the
non-wandering set, and the boundary-data classification of calibrated
sub-actions. Everything numeric in the core is an exact Fraction.
"""

__version__ = "0.1.0"
