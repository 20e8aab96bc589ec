"""A vortex blob around a valid stationary point stays concentrated.

Equal-weight particles on a hexagonal grid fill D(x0, eps); the run tracks
the center of vorticity B, the moment of inertia I and the support radius,
and stops if the support leaves D(x0, eps^beta).
"""

from __future__ import annotations

from vortexlab import DomainModel, init_blob, measure_exit_time, polynomial_map

dom = DomainModel.at(polynomial_map([40, 0, 0, 1]))
eps, beta = 0.05, 0.45
blob = init_blob(dom, dom.x0, eps, beta, 200)
print(f"{len(blob.positions)} particles, exit radius eps^beta = {blob.exit_radius:.3f}")
run = measure_exit_time(dom, blob, 2e-3, eps**-0.6, record_every=500, tail_radii=[0.02, 0.04])
for r in run.records:
    print(f"t={r.t:6.3f}  |B-x0|={abs(r.B - dom.x0):.1e}  I/eps^2={r.I / eps**2:.3f}  "
          f"R={r.R:.4f}  tail={r.tail_mass}")
print("result:", run.result.to_dict())
