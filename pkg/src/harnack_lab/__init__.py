"""
Numerical laboratory for dimension-free Harnack inequalities of SDEs with
irregular drift: regularizing transforms, Monte Carlo semigroups, verdicts.
"""

__version__ = "0.1.0"
