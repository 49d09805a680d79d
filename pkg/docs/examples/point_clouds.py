"""Metric-measure checks on random point clouds.

Garsia's pointwise oscillation bound and the Vitali--Carleson covering
argument are verified constructively on a random weighted cloud in the plane.
"""

import numpy as np

from ineqforge.metric import PointCloudSpace, RadialGauge, garsia_check, vitali_carleson_verify

rng = np.random.default_rng(1)
space = PointCloudSpace.from_points(rng.random((60, 2)), rng.random(60) + 0.05)
f = rng.normal(size=space.n)

g = garsia_check(space, f, RadialGauge.power(5.0))
print(f"Garsia: worst lhs/rhs {g['max_violation_ratio']:.3e} over {g['pairs']} pairs, holds={g['holds']}")

for lam in (0.3, 1.0, 3.0):
    cover, r = vitali_carleson_verify(space, f, 2.0, lam)
    print(f"lam = {lam}: {r['superlevel_points']} points, {cover.size} balls, "
          f"mass {r['measured_mass']:.4f} <= bound {r['bound']:.4f} (c_m = {r['c_m']:.2f})")
