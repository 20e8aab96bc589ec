"""Green's function, its regular part and the Robin function of a domain.

Everything is transported from the unit disk through the inverse ``S`` of
the conformal map (any Riemann map gives the same Green's function, so the
normalization at ``x0`` only matters for the Hessian symbols).  Gradients
are complex numbers ``d1 + i d2``; the perpendicular ``v -> (-v2, v1)`` is
multiplication by ``1j``.

Disk formulas in terms of ``a = S(x)``, ``b = S(y)``::

    G(x, y)       = (ln|a - b| - ln|1 - a conj(b)|) / 2pi
    grad_x G      = conj(S'(x)) [1/conj(a - b) - b/(conj(a) b - 1)] / 2pi
    robin(x)      = -ln(1 - |a|^2)/2pi + ln|S'(x)|/2pi
    grad robin(x) = conj(S'(x)) a/(pi(1 - |a|^2)) + S'(x) conj(S''(x)) / (2pi |S'(x)|^2)
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .conformal import DomainModel
from .errors import PreconditionError, SingularityError

TWO_PI = 2 * math.pi
SINGULAR_CUTOFF = 1e-14


@dataclass(frozen=True)
class GreenEvaluation:
    value: float
    grad_x: complex
    log_term: float
    gamma_term: float


@dataclass(frozen=True)
class RobinHessian:
    """Hessian of the Robin function at a stationary point and its symbols."""

    matrix: np.ndarray
    mu2: float
    p: float
    q: float


@dataclass(frozen=True)
class LemdevResult:
    sup_ratio: float
    limit_coeff: complex
    expected_limit: complex
    delta: float
    samples: int


def _jet(domain: DomainModel, x, seed=None):
    return domain.map.inverse_jet(x, seed)


def green(domain: DomainModel, x: complex, y: complex) -> GreenEvaluation:
    """Green's function ``G(x, y)`` (negative inside, zero on the boundary)."""
    x, y = complex(x), complex(y)
    if abs(x - y) < SINGULAR_CUTOFF:
        raise SingularityError("Green's function evaluated on the diagonal")
    a, s1, _ = _jet(domain, x)
    b = domain.map.invert(y)
    log_term = math.log(abs(x - y)) / TWO_PI
    gamma_term = (-math.log(abs(1 - a * b.conjugate())) + math.log(abs(a - b) / abs(x - y))) / TWO_PI
    grad = s1.conjugate() * (1 / (a - b).conjugate() - b / (a.conjugate() * b - 1)) / TWO_PI
    return GreenEvaluation(log_term + gamma_term, grad, log_term, gamma_term)


def grad_gamma_x(domain: DomainModel, x: complex, y: complex) -> complex:
    """Gradient in ``x`` of the regular part ``gamma(x, y)``.

    At ``x == y`` the smooth limit ``grad robin(x) / 2`` is returned.
    """
    x, y = complex(x), complex(y)
    if x == y:
        return 0.5 * grad_robin(domain, x)
    a, s1, _ = _jet(domain, x)
    b = domain.map.invert(y)
    return (
        s1.conjugate() * (1 / (a - b).conjugate() - b / (a.conjugate() * b - 1)) / TWO_PI
        - 1 / (TWO_PI * (x - y).conjugate())
    )


def robin(domain: DomainModel, x: complex) -> float:
    a, s1, _ = _jet(domain, complex(x))
    return (-math.log(1 - abs(a) ** 2) + math.log(abs(s1))) / TWO_PI


def grad_robin(domain: DomainModel, x: complex) -> complex:
    a, s1, s2 = _jet(domain, complex(x))
    return _grad_robin_disk(a, s1, s2)


def _grad_robin_disk(a, s1, s2):
    return np.conj(s1) * a / (math.pi * (1 - np.abs(a) ** 2)) + s1 * np.conj(s2) / (
        TWO_PI * np.abs(s1) ** 2
    )


def hessian_robin_at_stationary(domain: DomainModel, tol: float = 1e-8) -> RobinHessian:
    """Closed-form Hessian of the Robin function at the normalization point.

    ``D^2 robin(x0) = mu2/pi I + (1/2pi) [[p, q], [q, -p]]`` with
    ``mu2 = |T'|^2``, ``p = Re(T''' conj T')/mu2`` and
    ``q = (i T''') . T' / mu2 = -Im(T''' conj T')/mu2``.
    """
    t1, t2, t3 = domain.t1, domain.t2, domain.t3
    if abs(t2) > tol * abs(t1):
        raise PreconditionError(f"x0={domain.x0} is not stationary (|T''| = {abs(t2):.3e})")
    mu2 = abs(t1) ** 2
    prod = t3 * t1.conjugate()
    p = prod.real / mu2
    q = -prod.imag / mu2
    m = np.array([[mu2 / math.pi + p / TWO_PI, q / TWO_PI],
                  [q / TWO_PI, mu2 / math.pi - p / TWO_PI]])
    return RobinHessian(m, mu2, p, q)


def robin_hessian_fd(domain: DomainModel, x: complex, h: float = 1e-4) -> np.ndarray:
    """Second central differences of the Robin function (independent check)."""
    x = complex(x)
    pts = {}
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            pts[i, j] = robin(domain, x + h * (i + 1j * j))
    dxx = (pts[1, 0] - 2 * pts[0, 0] + pts[-1, 0]) / h**2
    dyy = (pts[0, 1] - 2 * pts[0, 0] + pts[0, -1]) / h**2
    dxy = (pts[1, 1] - pts[1, -1] - pts[-1, 1] + pts[-1, -1]) / (4 * h**2)
    return np.array([[dxx, dxy], [dxy, dyy]])


# ----------------------------------------------------------------------
# velocities
def _sources(sources) -> tuple[np.ndarray, np.ndarray]:
    return (np.asarray(sources.positions, dtype=complex),
            np.asarray(sources.weights, dtype=float))


def velocity(domain: DomainModel, sources, x: complex, exclude: int | None = None,
             rho: float = 0.0) -> complex:
    """Biot-Savart velocity at ``x`` induced by point masses ``sources``.

    The log-kernel term of source ``exclude`` is dropped; every source keeps
    its regular-part term, the one sitting at ``x`` through the smooth limit
    ``grad robin / 2``.
    """
    x = complex(x)
    z, w = _sources(sources)
    a, s1, s2 = _jet(domain, x)
    total = 0j
    for j in range(len(z)):
        d = x - z[j]
        if j == exclude or abs(d) < SINGULAR_CUTOFF:
            if j != exclude:
                raise SingularityError("velocity evaluated on a source point")
            if abs(d) < SINGULAR_CUTOFF:
                total += w[j] * 0.5 * complex(_grad_robin_disk(a, s1, s2))
            else:
                total += w[j] * grad_gamma_x(domain, x, z[j])
            continue
        r = max(abs(d), rho)
        total += w[j] * (d / (TWO_PI * r * r) + grad_gamma_x(domain, x, z[j]))
    return 1j * total


def self_induced_velocities(domain: DomainModel, z: np.ndarray, weights: np.ndarray,
                            seed: np.ndarray | None = None, rho: float = 0.0,
                            threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Velocity of every source under all the others plus the boundary terms.

    Source ``i`` feels the full ``grad_x G(z_i, z_j)`` for ``j != i`` and its
    own regular part through ``weights[i] * grad robin(z_i) / 2``.  Returns
    ``(velocities, disk_preimages)``.  Row sums run in source order, so the
    result does not depend on ``threads``.
    """
    a = domain.map.invert(z, seed)
    f1 = domain.map._d(a, 1)
    f2 = domain.map._d(a, 2)
    s1 = 1 / f1
    s2 = -f2 / f1**3
    self_term = 0.5 * weights * _grad_robin_disk(a, s1, s2)
    n = len(z)
    if n == 1:
        return 1j * self_term, a

    def rows(lo: int, hi: int) -> np.ndarray:
        ai = a[lo:hi, None]
        da = ai - a[None, :]
        idx = np.arange(lo, hi)
        da[idx - lo, idx] = 1.0  # masked below
        img = a[None, :] / (np.conj(ai) * a[None, :] - 1)
        if rho > 0.0:
            dz = z[lo:hi, None] - z[None, :]
            dz[idx - lo, idx] = 1.0
            r2 = np.maximum(np.abs(dz), rho) ** 2
            kern = (np.conj(s1[lo:hi, None]) * (1 / np.conj(da) - img) / TWO_PI
                    - 1 / (TWO_PI * np.conj(dz)) + dz / (TWO_PI * r2))
        else:
            kern = np.conj(s1[lo:hi, None]) * (1 / np.conj(da) - img) / TWO_PI
        kern[idx - lo, idx] = 0.0
        return (kern * weights[None, :]).sum(axis=1)

    if threads <= 1:
        summed = rows(0, n)
    else:
        bounds = np.linspace(0, n, min(threads, n) + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda lh: rows(*lh), zip(bounds[:-1], bounds[1:])))
        summed = np.concatenate(parts)
    return 1j * (summed + self_term), a


def robin_values(domain: DomainModel, z: np.ndarray, seed=None) -> np.ndarray:
    a = domain.map.invert(np.asarray(z, dtype=complex), seed)
    f1 = domain.map._d(a, 1)
    return (-np.log(1 - np.abs(a) ** 2) - np.log(np.abs(f1))) / TWO_PI


def green_matrix(domain: DomainModel, z: np.ndarray, seed=None) -> np.ndarray:
    """``G(z_i, z_j)`` for ``i != j`` (diagonal left at zero)."""
    a = domain.map.invert(np.asarray(z, dtype=complex), seed)
    n = len(a)
    da = a[:, None] - a[None, :]
    np.fill_diagonal(da, 1.0)
    den = 1 - a[:, None] * np.conj(a[None, :])
    np.fill_diagonal(den, 1.0)
    g = (np.log(np.abs(da)) - np.log(np.abs(den))) / TWO_PI
    g[np.arange(n), np.arange(n)] = 0.0
    return g


# ----------------------------------------------------------------------
def distance_to_boundary(domain: DomainModel, x: complex, samples: int = 4096) -> float:
    """Distance from ``x`` to the sampled boundary polyline."""
    b = domain.map.boundary(samples)
    return float(np.min(np.abs(b - complex(x))))


def lemdev_ratio(domain: DomainModel, delta: float, samples: int, rng_seed: int) -> LemdevResult:
    """Difference quotients of the boundary gradient near ``x0``.

    For ``x, y, z`` uniform in the disk ``D(x0, delta)`` computes
    ``r = (conj grad_x gamma(x, y) - conj grad_x gamma(z, y)) / (x - z)`` and
    compares it with ``T'''(x0) / (6 pi T'(x0))``.  Returns the sup of the
    deviation and the mean of ``r``.
    """
    if not 0 < delta:
        raise PreconditionError("delta must be positive")
    delta_max = distance_to_boundary(domain, domain.x0)
    if delta >= delta_max:
        raise PreconditionError(f"delta={delta} exceeds the inscribed radius {delta_max:.6g}")
    rng = np.random.default_rng(rng_seed)

    def draw(m: int) -> np.ndarray:
        out = np.empty(0, dtype=complex)
        while len(out) < m:
            c = rng.uniform(-1, 1, size=(2 * m, 2))
            c = c[(c**2).sum(axis=1) < 1.0]
            out = np.concatenate([out, c[:, 0] + 1j * c[:, 1]])
        return domain.x0 + delta * out[:m]

    xs, ys, zs = [], [], []
    while len(xs) < samples:
        x, y, z = draw(samples), draw(samples), draw(samples)
        keep = (np.abs(x - z) >= 1e-3 * delta) & (np.abs(x - y) > 1e-6 * delta) & (
            np.abs(z - y) > 1e-6 * delta)
        xs.extend(x[keep])
        ys.extend(y[keep])
        zs.extend(z[keep])
    x = np.array(xs[:samples])
    y = np.array(ys[:samples])
    z = np.array(zs[:samples])

    fmap = domain.map
    ax = fmap.invert(x, np.full(samples, domain.w0))
    ay = fmap.invert(y, np.full(samples, domain.w0))
    az = fmap.invert(z, np.full(samples, domain.w0))
    s1x = 1 / fmap._d(ax, 1)
    s1z = 1 / fmap._d(az, 1)

    def conj_grad(s1, a, b, p, q):
        # conj(grad_x gamma(p, q)) in disk variables.
        return (s1 / (a - b) - s1 * np.conj(b) / (a * np.conj(b) - 1)) / TWO_PI - 1 / (
            TWO_PI * (p - q))

    r = (conj_grad(s1x, ax, ay, x, y) - conj_grad(s1z, az, ay, z, y)) / (x - z)
    expected = domain.t3 / (6 * math.pi * domain.t1)
    return LemdevResult(float(np.max(np.abs(r - expected))), complex(np.mean(r)), expected,
                        delta, samples)

