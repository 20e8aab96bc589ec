"""Stationary points of the Robin function and their classification.

valid: the Hessian is a multiple of the identity (T''' = 0);
stable / unstable: both / one Hessian eigenvalues positive.
"""

from __future__ import annotations

from vortexlab import (
    find_stationary_points,
    identity_map,
    locate_unstable_example,
    peanut_map,
    polynomial_map,
    sc_regular_polygon,
)

for fmap in (identity_map(), polynomial_map([40, 0, 0, 1], label="40z+z^4"),
             polynomial_map([1, 0, 0.1], label="z+0.1z^3"), sc_regular_polygon(5),
             peanut_map(0.4)):
    for rep in find_stationary_points(fmap):
        print(f"{fmap.label:>12}: x0 = {rep.location:.4f}  {rep.classification:>8}  "
              f"lambda = ({rep.lambda_plus:.5f}, {rep.lambda_minus:.5f})")

fmap, rep = locate_unstable_example()
print(f"first unstable point in the default family: {fmap.label} at {rep.location}")
