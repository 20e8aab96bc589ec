"""Point vortices: the circular orbit in the disk and a Kirchhoff-Routh system.

A single vortex moves along level lines of the Robin function; in the unit
disk at radius 1/2 that is a circle traversed with angular velocity 2/(3 pi).
"""

from __future__ import annotations

import math

import numpy as np

from vortexlab import (
    DomainModel,
    VortexSystem,
    hamiltonian,
    identity_map,
    polynomial_map,
    simulate_point_vortices,
    simulate_single_vortex,
)

disk = DomainModel.at(identity_map())
period = 3 * math.pi**2
tr = simulate_single_vortex(disk, 0.5, 1e-3, period, record_every=1000)
print(f"after one period: z = {tr.positions[-1]:.10f}")
print(f"max radius drift = {np.max(np.abs(np.abs(tr.positions) - 0.5)):.1e}")

dom = DomainModel.at(polynomial_map([40, 0, 0, 1]))
sys0 = VortexSystem(np.array([5 + 2j, -4 - 6j, 10j]), np.array([1.0, 1.0, -0.5]))
states = simulate_point_vortices(dom, sys0, 0.05, 400)
h = [hamiltonian(dom, s.positions, s.masses) for s in states]
print(f"three vortices in 40z+z^4: H drift {abs(h[-1] - h[0]) / abs(h[0]):.1e} over t=20")
print("final positions:", np.round(states[-1].positions, 4))
