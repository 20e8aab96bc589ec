"""Green's function, its regular part and the Robin function.

Everything is transported from the disk through the normalized map T.  The
Robin function is the regular part on the diagonal; its gradient drives a
single point vortex.
"""

from __future__ import annotations

import math

from vortexlab import (
    DomainModel,
    grad_robin,
    green,
    hessian_robin_at_stationary,
    identity_map,
    polynomial_map,
    robin,
)

disk = DomainModel.at(identity_map())
g = green(disk, 0.5, -0.5)
print(f"G_disk(0.5, -0.5) = {g.value:.12f}  (closed form {-math.log(1.25) / (2 * math.pi):.12f})")
print(f"  split: log term {g.log_term:.6f} + regular part {g.gamma_term:.6f}")
print(f"robin_disk(0.5) = {robin(disk, 0.5):.9f}")
print(f"grad robin_disk(0.5) = {grad_robin(disk, 0.5):.9f}")

quartic = DomainModel.at(polynomial_map([40, 0, 0, 1]))
print(f"robin at the center of 40z+z^4: {robin(quartic, 0):.9f} = ln(1/40)/2pi")

h = hessian_robin_at_stationary(DomainModel.at(polynomial_map([1, 0, 0.1])))
print("Hessian at the center of z+0.1z^3:\n", h.matrix)
print(f"mu2 = {h.mu2:.3f}, p^2 + q^2 = {h.p**2 + h.q**2:.3f}")
