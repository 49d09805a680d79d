"""The weak-type engine applied to operator families T_t.

Any family sampled on x-cells and log-spaced t-cells can be fed to
``family_engine``; here the heat semigroup (large-lambda limit ||f||_2^2)
and the Caffarelli--Silvestre quotient for (-Lap)^{1/2}.
"""

from ineqforge.corpus import builtin
from ineqforge.extension import calibrate_mu, heat_experiment, mu_closed_form, verify_cs_bsy

f = builtin("gaussian", 1)

heat = heat_experiment(f, 2.0, x_cells=2048, t_cells=256)
print("heat plateau", heat.limit_estimate.value, " target", heat.limit_target)

cal = calibrate_mu(0.5, 1, [f, f.dilated(1.5)])
print(f"mu_1/2 fitted {cal.mu_s:.6f} (closed form {mu_closed_form(0.5):.6f}, R^2 {cal.fit_quality:.7f})")
r = verify_cs_bsy(f, 0.5, 2.0, mu=cal, x_cells=2048, t_cells=256)
# the weak-type side is a sup over a finite lambda grid, so the comparison carries a 2% quadrature slack
print(f"||(-Lap)^(1/2) f||_2 = {r['lhs']:.5f}, weak-type side {r['rhs']:.5f}, holds={r['holds']}")
print(f"plateau {r['liminf_plateau']:.5f} vs ||(-Lap)^(1/2) f||_2^2 = {r['lhs_power']:.5f}")
