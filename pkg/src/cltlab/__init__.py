"""cltlab: numerical verification of Gaussian-approximation gaps.

Computes, bounds, and empirically checks Delta_f = |E f(W_n) - E f(Z)|
for standardized sums of i.i.d. random variables, via Edgeworth
expansions, ridge/mollifier integral representations, and Monte Carlo
oracles.
"""

__version__ = "0.1.0"
