"""phi4mi: multi-index model toolkit for a singular phi^4-type SPDE.

Exact combinatorial algebra (gradings, formal power series, symbolic
recursion for the forcing coefficients) plus a spectral Monte Carlo layer on
a periodic parabolic space-time lattice that realizes the model fields,
renormalization constants, structure-group endomorphisms and their
first-variation counterparts, together with statistical verification of the
expected scaling exponents.
"""

__version__ = "0.1.0"
