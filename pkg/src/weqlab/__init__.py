"""Finite laboratory for actions of integer matrix groups on their congruence quotients.

The package enumerates the groups SL_d(Z/nZ), realizes translation actions of a
symmetric generator set as permutation tuples, and computes exact
joint-occupancy statistics of two-class (and k-class) partitions together with
expansion, mixing, and step-function-approximation diagnostics.  All
combinatorial quantities are exact (integer counts / rationals); floats appear
only in spectral estimates, randomized mixing checks, and report rendering.
"""

__version__ = "0.1.0"
