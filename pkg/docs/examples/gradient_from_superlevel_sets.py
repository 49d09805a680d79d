"""Recovering ||f'||_2^2 from the measure of large difference quotients.

For f(x) = exp(-x^2) the curve lam^2 |{(x, t) : |f(x+t) - f(x)|/t^{3/2} > lam}|
flattens out at ||f'||_2^2 = sqrt(pi/2) as lam grows.  The Bourgain--Nguyen
curve in delta does the same as delta -> 0.
"""

import numpy as np

from ineqforge.corpus import builtin
from ineqforge.functionals import PairGrid, QuotientSpec, bn_curve, bsy_curve, extract_limit

f = builtin("gaussian", 1)
grid = PairGrid(2048, 1024)

curve = bsy_curve(f, QuotientSpec("bsy_1d_onesided"), np.geomspace(0.3, 300, 16), grid)
for lam, v in zip(curve.params, curve.values):
    print(f"lam = {lam:8.3f}   lam^2 |E_lam| = {v:.5f}")
print("plateau", extract_limit(curve).value, " target", np.sqrt(np.pi / 2))

bn = bn_curve(f, 2, 1.0, np.geomspace(1e-4, 1, 13), grid)
print("small-delta plateau", extract_limit(bn, "small_param").value)
