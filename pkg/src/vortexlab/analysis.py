"""Stationary points of the Robin function and confinement-law fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .conformal import ConformalMap, DomainModel, polynomial_map, require_usable
from .errors import PreconditionError, SearchFailed
from .greens import TWO_PI, grad_robin, hessian_robin_at_stationary

Classification = Literal["valid", "stable", "unstable", "degenerate"]

VALID_TOL = 1e-8
DEGENERATE_BAND = 1e-8
STATIONARY_TOL = 1e-8
DEDUP_DIST = 1e-6


@dataclass(frozen=True)
class StationaryReport:
    location: complex
    disk_preimage: complex
    mu2: float
    p: float
    q: float
    lambda_plus: float
    lambda_minus: float
    classification: Classification
    residual: float

    def to_dict(self) -> dict:
        return {
            "location": [self.location.real, self.location.imag],
            "disk_preimage": [self.disk_preimage.real, self.disk_preimage.imag],
            "mu2": self.mu2,
            "p": self.p,
            "q": self.q,
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "class": self.classification,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class LawFit:
    kind: Literal["power", "log"]
    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]
    excluded: tuple[tuple[float, float], ...] = field(default=())

    @property
    def alpha(self) -> float:
        """Confinement exponent of a power fit ``tau ~ eps**(-alpha)``."""
        return -self.slope

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points": [list(p) for p in self.points],
        }


# ----------------------------------------------------------------------
# search in disk coordinates: h(w) = robin_D(w) - ln|f'(w)| / 2pi
def _grad_h(fmap: ConformalMap, w: complex) -> complex:
    f1, f2 = fmap._d(w, 1), fmap._d(w, 2)
    return w / (math.pi * (1 - abs(w) ** 2)) - (f2 / f1).conjugate() / TWO_PI


def _hess_h(fmap: ConformalMap, w: complex) -> np.ndarray:
    f1, f2, f3 = fmap._d(w, 1), fmap._d(w, 2), fmap._d(w, 3)
    s = 1 - abs(w) ** 2
    v = np.array([w.real, w.imag])
    disk = np.eye(2) / (math.pi * s) + 2 * np.outer(v, v) / (math.pi * s * s)
    g2 = f3 / f1 - (f2 / f1) ** 2
    log_part = np.array([[g2.real, -g2.imag], [-g2.imag, -g2.real]]) / TWO_PI
    return disk - log_part


def _newton_stationary(fmap: ConformalMap, w: complex, iters: int = 60) -> complex | None:
    for _ in range(iters):
        g = _grad_h(fmap, w)
        if abs(g) < 1e-14:
            return w
        try:
            step = np.linalg.solve(_hess_h(fmap, w), [g.real, g.imag])
        except np.linalg.LinAlgError:
            return None
        dw = complex(step[0], step[1])
        t = 1.0
        while abs(w - t * dw) >= 0.999 and t > 1e-8:
            t *= 0.5
        w_new = w - t * dw
        if abs(w_new) >= 0.999:
            return None
        if abs(w_new - w) < 1e-15:
            w = w_new
            break
        w = w_new
    return w if abs(_grad_h(fmap, w)) < 1e-10 else None


def _eigen(mu2: float, p: float, q: float) -> tuple[float, float]:
    root = math.hypot(p, q)
    return (2 * mu2 + root) / (4 * math.pi), (2 * mu2 - root) / (4 * math.pi)


def _class_of(t1: complex, t3: complex) -> Classification:
    a3 = abs(t3)
    cube = abs(t1) ** 3
    if a3 <= VALID_TOL * cube:
        return "valid"
    if a3 < 2 * cube * (1 - DEGENERATE_BAND):
        return "stable"
    if a3 > 2 * cube * (1 + DEGENERATE_BAND):
        return "unstable"
    return "degenerate"


def classify(domain: DomainModel | ConformalMap, report_location: complex,
             rotation: complex = 1 + 0j) -> StationaryReport:
    """Hessian symbols, eigenvalues and validity class at a stationary point.

    ``lambda_+-`` are the eigenvalues of half the Robin Hessian,
    ``(2 mu2 +- sqrt(p^2 + q^2)) / 4pi``.
    """
    fmap = domain.map if isinstance(domain, DomainModel) else domain
    w0 = fmap.invert(complex(report_location))
    dom = DomainModel.at(fmap, w0, rotation)
    residual = abs(grad_robin(dom, dom.x0))
    if residual >= STATIONARY_TOL:
        raise PreconditionError(f"point {dom.x0} is not stationary (|grad robin| = {residual:.3e})")
    h = hessian_robin_at_stationary(dom, tol=1e-6)
    lp, lm = _eigen(h.mu2, h.p, h.q)
    return StationaryReport(dom.x0, w0, h.mu2, h.p, h.q, lp, lm, _class_of(dom.t1, dom.t3),
                            residual)


def find_stationary_points(domain: DomainModel | ConformalMap, radial: int = 8,
                           angular: int = 16) -> list[StationaryReport]:
    """Critical points of the Robin function from a polar grid of Newton seeds.

    Roots are deduplicated at distance 1e-6 in the disk and returned sorted
    by preimage angle, then radius.
    """
    fmap = domain.map if isinstance(domain, DomainModel) else domain
    require_usable(fmap)
    seeds = [0j]
    for i in range(1, radial + 1):
        r = 0.95 * i / radial
        for k in range(angular):
            seeds.append(r * complex(math.cos(2 * math.pi * k / angular),
                                     math.sin(2 * math.pi * k / angular)))
    roots: list[complex] = []
    for s in seeds:
        w = _newton_stationary(fmap, s)
        if w is None:
            continue
        if all(abs(w - r) > DEDUP_DIST for r in roots):
            roots.append(w)
    if not roots:
        raise SearchFailed(f"no stationary point converged for {fmap.label!r} "
                           f"({len(seeds)} seeds)")
    roots.sort(key=lambda w: (round(math.atan2(w.imag, w.real), 9) if abs(w) > DEDUP_DIST else -4.0,
                              abs(w)))
    reports = []
    for w in roots:
        dom = DomainModel.at(fmap, w)
        # cross-check against the T'' = 0 characterization
        if abs(dom.t2) > 1e-7 * abs(dom.t1):
            continue
        reports.append(classify(fmap, dom.x0))
    if not reports:
        raise SearchFailed(f"no stationary point passed the T''=0 check for {fmap.label!r}")
    return reports


def check_valid(domain: DomainModel | ConformalMap, x0: complex) -> bool:
    """True iff ``|T'''(x0)| <= 1e-8 |T'(x0)|^3`` at the stationary point ``x0``."""
    return classify(domain, x0).classification == "valid"


def peanut_map(a: float, terms: int = 24) -> ConformalMap:
    """Odd polynomial truncation of ``z / (1 - a z^2)``.

    For ``1/3 < a < 1`` the image is a two-lobed domain whose center is a
    saddle of the Robin function (``|f'''(0)| = 6a > 2 |f'(0)|``).  These
    maps fail the coefficient certificate, so they carry the override flag;
    :func:`numerical_univalence` backs it.
    """
    coeffs = [0j] * (2 * terms + 1)
    for k in range(terms + 1):
        coeffs[2 * k] = a**k
    return polynomial_map(coeffs, label=f"peanut-a{a:.2f}", allow_unproven=True)


def default_peanut_family() -> list[ConformalMap]:
    return [peanut_map(a) for a in (0.30, 0.40, 0.50, 0.60)]


def numerical_univalence(fmap: ConformalMap, samples: int = 4096) -> bool:
    """Numerical Darboux check: ``f'`` has no zero in the disk (argument
    principle on the unit circle) and the boundary image is a simple curve."""
    from shapely.geometry import LinearRing

    if fmap.kind == "regular_polygon":
        # f' vanishes at the prevertices; polygons are univalent by construction
        b = fmap.boundary(samples)[:-1]
        return bool(LinearRing(np.column_stack([b.real, b.imag])).is_simple)
    theta = 2 * np.pi * np.arange(samples) / samples
    d = fmap._d(np.exp(1j * theta), 1)
    if np.any(d == 0):
        return False
    winding = np.sum(np.angle(np.roll(d, -1) / d)) / (2 * np.pi)
    if round(winding) != 0:
        return False
    b = fmap.boundary(samples)[:-1]
    return bool(LinearRing(np.column_stack([b.real, b.imag])).is_simple)


def locate_unstable_example(map_family: Sequence[ConformalMap] | None = None,
                            radial: int = 8, angular: int = 16
                            ) -> tuple[ConformalMap, StationaryReport] | None:
    """First ``(map, point)`` in the family classified unstable, or ``None``."""
    family = default_peanut_family() if map_family is None else map_family
    for fmap in family:
        for rep in find_stationary_points(fmap, radial, angular):
            if rep.classification == "unstable":
                return fmap, rep
    return None


def check_rotation_invariance(curve_samples: Sequence[complex], p: int) -> bool:
    """Does rotation by ``2pi/p`` map the sampled curve onto itself?

    ``curve_samples`` are ``M`` points at uniformly spaced parameters,
    relative to the rotation center; the rotated sample ``k`` is compared with
    sample ``k + M/p``.
    """
    z = np.asarray(curve_samples, dtype=complex)
    m = len(z)
    if p < 1 or m % p:
        raise ValueError(f"sample count {m} is not divisible by p={p}")
    if m >= 2 and z[0] == z[-1]:
        raise ValueError("pass the open sample set (without the closing point)")
    diam = float(np.max(np.abs(z[:, None] - z[None, :])))
    rotated = z * np.exp(2j * np.pi / p)
    dev = np.max(np.abs(rotated - np.roll(z, -(m // p))))
    return bool(dev < 1e-6 * diam)


# ----------------------------------------------------------------------
def _regress(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    a = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def _split(points) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    use, skip = [], []
    for eps, tau in points:
        (use if math.isfinite(tau) else skip).append((float(eps), float(tau)))
    if len(use) < 3:
        raise ValueError(f"need at least 3 finite points, got {len(use)}")
    return use, skip


def fit_power_law(points: Sequence[tuple[float, float]]) -> LawFit:
    """Least squares of ``ln tau`` on ``ln eps``; ``slope = -alpha``."""
    use, skip = _split(points)
    arr = np.array(use)
    if np.any(arr <= 0):
        raise ValueError("power-law fit needs positive epsilon and tau")
    s, b, r2 = _regress(np.log(arr[:, 0]), np.log(arr[:, 1]))
    return LawFit("power", s, b, r2, tuple(use), tuple(skip))


def fit_log_law(points: Sequence[tuple[float, float]]) -> LawFit:
    """Least squares of ``tau`` on ``|ln eps|``."""
    use, skip = _split(points)
    arr = np.array(use)
    s, b, r2 = _regress(np.abs(np.log(arr[:, 0])), arr[:, 1])
    return LawFit("log", s, b, r2, tuple(use), tuple(skip))
