"""Conformal maps from the unit disk: evaluation, inversion, normalization.

A domain is the image of the disk under an injective holomorphic map f.
Polynomial maps with a dominant linear term are certified injective by a
coefficient inequality; regular polygons come from Schwarz-Christoffel.
"""

from __future__ import annotations

from vortexlab import (
    check_injectivity,
    normalized_derivatives_at,
    polynomial_map,
    sc_regular_polygon,
)

quartic = polynomial_map([40, 0, 0, 1], label="40z+z^4")
print("f(0.2) =", quartic.eval(0.2))
print("f''''(0) =", quartic.derivative(0, 4))
print("certificate:", check_injectivity(quartic))

w = 0.2 + 0.1j
x = quartic.eval(w)
print(f"round trip |invert(f(w)) - w| = {abs(quartic.invert(x) - w):.2e}")

# T = normalized inverse map sending x0 = f(0) to the origin
print("T', T'', T''' at x0:", normalized_derivatives_at(quartic, 0))
print("z + 0.1 z^3:", normalized_derivatives_at(polynomial_map([1, 0, 0.1]), 0))

pent = sc_regular_polygon(5)
print("pentagon vertex f(1) =", pent.eval(1.0))
print("pentagon f''(0), f'''(0) =", pent.derivative(0, 2), pent.derivative(0, 3))
