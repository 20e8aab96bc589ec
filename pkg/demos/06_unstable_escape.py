"""Logarithmic escape from an unstable stationary point.

Near a saddle of the Robin function a vortex displaced by eps along the
repelling direction leaves D(x0, eps^beta) after roughly (1-beta)/xi |ln eps|.
"""

from __future__ import annotations

from vortexlab import (
    DomainModel,
    fit_log_law,
    locate_unstable_example,
    unstable_direction,
    unstable_exit_experiment,
)

fmap, rep = locate_unstable_example()
dom = DomainModel.at_point(fmap, rep.location)
_, xi = unstable_direction(dom)
beta = 0.5
res = unstable_exit_experiment(dom, rep.location, [1e-2, 3e-3, 1e-3, 3e-4, 1e-4], beta, 1e-2, 500)
for r in res:
    print(f"eps={r.epsilon:.0e}  tau={r.tau:.2f}")
fit = fit_log_law([(r.epsilon, r.tau) for r in res])
print(f"fit tau = {fit.slope:.3f}|ln eps| + {fit.intercept:.3f}, r^2 = {fit.r_squared:.6f}")
print(f"linearized prediction for the slope: (1-beta)/xi = {(1 - beta) / xi:.3f}")
