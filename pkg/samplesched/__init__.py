"""
Exact and Monte Carlo analysis of the single-sample scheduling rule SAM on
one machine, against the random-order benchmark and the expected-time
optimum.
"""
__version__ = '0.1'
