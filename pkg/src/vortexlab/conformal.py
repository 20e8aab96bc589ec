"""Univalent maps from the unit disk onto a planar domain.

A :class:`ConformalMap` is a map ``f`` from the unit disk ``D`` onto the
domain ``Omega``.  Its inverse ``S = f^{-1}`` is a Riemann map of ``Omega``;
the normalized map ``T`` used for stationary-point work is ``S`` composed
with the disk automorphism sending ``S(x0)`` to ``0``.

Every evaluation routine accepts either a Python ``complex`` (fast scalar
path, used by the single-vortex integrators) or a numpy array of complex
numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
from scipy.special import beta as beta_fn

from .errors import DomainError, InversionError, PreconditionError

MapKind = Literal["identity", "polynomial", "regular_polygon"]
Certificate = Literal["proven", "unproven"]

DISK_TOL = 1e-12
SERIES_TAIL = 1e-12
SERIES_RADIUS = 0.999
DEFAULT_INVERSION_TOL = 1e-13
MAX_NEWTON = 64
GRID_ANGULAR = 32
GRID_RADIAL = 16


def _horner(coeffs: Sequence[complex], w):
    acc = coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * w + c
    return acc


def _poly_derivative(coeffs: Sequence[complex]) -> tuple[complex, ...]:
    if len(coeffs) <= 1:
        return (0j,)
    return tuple(k * coeffs[k] for k in range(1, len(coeffs)))


def _gauss_legendre_panels(levels: int = 14, nodes: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0, 1], geometrically graded toward s = 1."""
    x, wts = np.polynomial.legendre.leggauss(nodes)
    edges = [0.0] + [1.0 - 0.5**k for k in range(1, levels)] + [1.0]
    s_all, w_all = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        s_all.append(0.5 * (b - a) * x + 0.5 * (a + b))
        w_all.append(0.5 * (b - a) * wts)
    return np.concatenate(s_all), np.concatenate(w_all)


_GL_S, _GL_W = _gauss_legendre_panels()


@dataclass(frozen=True)
class ConformalMap:
    """A univalent map ``f: D -> Omega``.

    ``coeffs`` holds the polynomial coefficients starting at degree 1, so
    ``f(w) = x0 + sum_k coeffs[k-1] w**k``.  For ``regular_polygon`` the
    map is ``x0 + scale * P_n(w)`` where ``P_n`` sends the unit disk onto
    the regular ``n``-gon with vertices at the ``n``-th roots of unity.
    ``allow_unproven`` is the explicit override that lets a map failing the
    coefficient injectivity certificate be used in dynamics.
    """

    kind: MapKind = "identity"
    coeffs: tuple[complex, ...] = ()
    x0: complex = 0j
    n: int = 0
    scale: complex = 1 + 0j
    label: str = ""
    allow_unproven: bool = False
    inversion_tolerance: float = field(default=DEFAULT_INVERSION_TOL, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", complex(self.x0))
        object.__setattr__(self, "scale", complex(self.scale))
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        vals = [self.x0, self.scale, *self.coeffs]
        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in vals):
            raise ValueError("map parameters must be finite")
        if self.kind == "polynomial":
            if not self.coeffs or self.coeffs[0] == 0:
                raise ValueError("polynomial map needs a nonzero degree-1 coefficient")
        elif self.kind == "regular_polygon":
            if self.n < 3:
                raise ValueError("regular polygon needs n >= 3")
            if self.scale == 0:
                raise ValueError("polygon scale must be nonzero")
        elif self.kind != "identity":
            raise ValueError(f"unknown map kind {self.kind!r}")

    # ------------------------------------------------------------------
    # coefficient tables
    @cached_property
    def _poly_tables(self) -> tuple[tuple[complex, ...], ...]:
        if self.kind == "identity":
            base: tuple[complex, ...] = (self.x0, 1 + 0j)
        else:
            base = (self.x0, *self.coeffs)
        tables = [base]
        for _ in range(4):
            tables.append(_poly_derivative(tables[-1]))
        return tuple(tables)

    @cached_property
    def _polygon_constant(self) -> float:
        # f(1) = 1 fixes the vertex at 1; symmetry places the rest at the roots of unity.
        n = self.n
        return n / beta_fn(1.0 / n, 2.0 - 2.0 / n)

    @property
    def _alpha(self) -> float:
        return 1.0 - 2.0 / self.n

    @cached_property
    def _series(self) -> np.ndarray:
        """Coefficients d_j with P_n(w) = c * w * sum_j d_j (w**n)**j."""
        n, a = self.n, self._alpha
        r = SERIES_RADIUS**n
        jmax = int(math.ceil(math.log(SERIES_TAIL * (1 - r)) / math.log(r))) + 2
        b = np.empty(jmax + 1)
        b[0] = 1.0
        for j in range(jmax):
            b[j + 1] = b[j] * (j - a) / (j + 1)
        return b / (n * np.arange(jmax + 1) + 1)

    def _series_terms(self, radius: float) -> int:
        """Number of series terms whose tail is below SERIES_TAIL at ``radius``."""
        u = radius**self.n
        if u == 0.0:
            return 1
        j = int(math.ceil(math.log(SERIES_TAIL * (1 - u)) / math.log(u)))
        return min(max(j + 1, 1), len(self._series))

    def taylor_coefficients(self, degree: int) -> np.ndarray:
        """Taylor coefficients of ``f`` about 0 up to ``degree`` (index = power)."""
        out = np.zeros(degree + 1, dtype=complex)
        if self.kind == "regular_polygon":
            out[0] = self.x0
            k = self.scale * self._polygon_constant
            d = self._series
            for j in range(len(d)):
                p = self.n * j + 1
                if p > degree:
                    break
                out[p] = k * d[j]
        else:
            base = self._poly_tables[0]
            m = min(degree + 1, len(base))
            out[:m] = base[:m]
        return out

    # ------------------------------------------------------------------
    # evaluation
    def _check_disk(self, w) -> None:
        if np.any(np.abs(w) > 1 + DISK_TOL):
            raise DomainError("evaluation point outside the closed unit disk")

    def eval(self, w):
        """Return ``f(w)`` for ``|w| <= 1``."""
        self._check_disk(w)
        return self._f(w)

    def _f(self, w):
        if self.kind != "regular_polygon":
            return _horner(self._poly_tables[0], w)
        if np.ndim(w) == 0:
            return self._polygon_scalar(complex(w))
        w = np.asarray(w, dtype=complex)
        out = np.empty_like(w)
        mag = np.abs(w)
        inner = mag <= SERIES_RADIUS
        if inner.any():
            out[inner] = self._polygon_series(w[inner])
        if (~inner).any():
            out[~inner] = self._polygon_path(w[~inner])
        return out

    def _polygon_scalar(self, w: complex) -> complex:
        if abs(w) <= SERIES_RADIUS:
            return complex(self._polygon_series(w))
        return complex(self._polygon_path(np.array([w]))[0])

    def _polygon_series(self, w):
        radius = float(np.max(np.abs(w))) if np.ndim(w) else abs(w)
        j = self._series_terms(radius)
        d = self._series[:j]
        u = w**self.n
        acc = d[-1] + 0j
        for c in d[-2::-1]:
            acc = acc * u + c
        return self.x0 + self.scale * self._polygon_constant * w * acc

    def _polygon_path(self, w: np.ndarray) -> np.ndarray:
        # Series up to radius 0.999, then graded Gauss-Legendre along the ray.
        start = w / np.abs(w) * SERIES_RADIUS
        base = self._polygon_series(start)
        t = start[:, None] + _GL_S[None, :] * (w - start)[:, None]
        integrand = self._fprime_unit(t)
        return base + self.scale * self._polygon_constant * (integrand @ _GL_W) * (w - start)

    def _fprime_unit(self, t):
        return (1 - t**self.n) ** self._alpha

    def _polygon_derivative(self, w, order: int):
        n, a = self.n, self._alpha
        k = self.scale * self._polygon_constant
        h = 1 - w**n
        if order == 1:
            return k * h**a
        h1 = -n * w ** (n - 1)
        h2 = -n * (n - 1) * w ** (n - 2)
        if order == 2:
            return k * a * h ** (a - 1) * h1
        if order == 3:
            return k * (a * (a - 1) * h ** (a - 2) * h1**2 + a * h ** (a - 1) * h2)
        h3 = -n * (n - 1) * (n - 2) * w ** (n - 3)
        return k * (
            a * (a - 1) * (a - 2) * h ** (a - 3) * h1**3
            + 3 * a * (a - 1) * h ** (a - 2) * h1 * h2
            + a * h ** (a - 1) * h3
        )

    def derivative(self, w, order: int = 1):
        """Return ``f^(order)(w)`` for ``order`` in 1..4."""
        if order not in (1, 2, 3, 4):
            raise ValueError(f"derivative order must be in 1..4, got {order!r}")
        self._check_disk(w)
        return self._d(w, order)

    def _d(self, w, order: int):
        if self.kind == "regular_polygon":
            return self._polygon_derivative(w, order)
        table = self._poly_tables[order]
        out = _horner(table, w)
        if len(table) == 1 and np.ndim(w):
            out = np.full(np.shape(w), out, dtype=complex)
        return out

    # ------------------------------------------------------------------
    # inversion
    @cached_property
    def _grid_seeds(self) -> np.ndarray:
        radii = np.linspace(0.0, 0.97, GRID_RADIAL)
        angles = 2 * np.pi * np.arange(GRID_ANGULAR) / GRID_ANGULAR
        return (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()

    def _newton(self, x: complex, w: complex, tol: float) -> complex | None:
        polygon = self.kind == "regular_polygon"
        for _ in range(MAX_NEWTON):
            r = self._f(w) - x
            d = self._d(w, 1)
            if d == 0:
                return None
            step = r / d
            if abs(r) <= tol:
                # one polishing step; the residual test already certified convergence
                w_pol = w - step
                return w_pol if abs(w_pol) < 1.0 or not polygon else w
            w_new = w - step
            if polygon:
                # The series is only defined on the closed disk; backtrack.
                t = 1.0
                while abs(w_new) >= 1.0 and t > 1e-6:
                    t *= 0.5
                    w_new = w - t * step
                if abs(w_new) >= 1.0:
                    return None
            elif abs(w_new) > 4.0:
                return None
            w = w_new
        return None

    def invert(self, x, seed=None):
        """Return ``w`` in the open disk with ``f(w) = x``.

        Newton iteration on ``f(w) - x``, started from ``seed`` (if given)
        and otherwise from the best points of a 32x16 polar grid.  Raises
        :class:`InversionError` when no start converges to ``|w| < 1``.
        """
        if np.ndim(x):
            return self._invert_array(np.asarray(x, dtype=complex), seed)
        return self._invert_scalar(complex(x), seed)

    def _invert_scalar(self, x: complex, seed=None) -> complex:
        if not (math.isfinite(x.real) and math.isfinite(x.imag)):
            raise DomainError("non-finite point")
        if self.kind == "identity":
            w = x - self.x0
            if abs(w) >= 1:
                raise InversionError("point outside domain or inversion failure")
            return w
        tol = self.inversion_tolerance * (1 + abs(x))
        if seed is not None:
            w = self._newton(x, complex(seed), tol)
            if w is not None and abs(w) < 1:
                return w
        grid = self._grid_seeds
        res = np.abs(self._f(grid) - x)
        for s in grid[np.argsort(res, kind="stable")[:8]]:
            w = self._newton(x, complex(s), tol)
            if w is not None and abs(w) < 1:
                return w
        raise InversionError("point outside domain or inversion failure")

    def _invert_array(self, x: np.ndarray, seed=None) -> np.ndarray:
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite point")
        if self.kind == "identity":
            w = x - self.x0
            if np.any(np.abs(w) >= 1):
                raise InversionError("point outside domain or inversion failure")
            return w
        tol = self.inversion_tolerance * (1 + np.abs(x))
        if seed is None:
            grid = self._grid_seeds
            res = np.abs(self._f(grid)[None, :] - x.ravel()[:, None])
            w = grid[np.argmin(res, axis=1)].reshape(x.shape)
        else:
            w = np.array(seed, dtype=complex, copy=True).reshape(x.shape)
        done = np.zeros(x.shape, dtype=bool)
        for _ in range(MAX_NEWTON):
            r = self._f(w) - x
            done = np.abs(r) <= tol
            if done.all():
                break
            step = np.where(done, 0, r / self._d(w, 1))
            w_new = w - step
            bad = np.abs(w_new) >= 1.0 if self.kind == "regular_polygon" else np.abs(w_new) > 4.0
            if bad.any():
                w_new = np.where(bad, w, w_new)
                done |= bad  # fall back to the scalar path for these
            w = w_new
        r = self._f(w) - x
        ok = np.abs(r) <= tol
        w_pol = w - r / self._d(w, 1)
        w = np.where(ok & (np.abs(w_pol) < 1), w_pol, w)
        ok &= np.abs(w) < 1
        if not ok.all():
            flat_w, flat_x = w.ravel(), x.ravel()
            for i in np.flatnonzero(~ok.ravel()):
                flat_w[i] = self._invert_scalar(complex(flat_x[i]))
            w = flat_w.reshape(x.shape)
        return w

    # ------------------------------------------------------------------
    def inverse_jet(self, x, seed=None):
        """Return ``(w, S', S'')`` for the inverse ``S = f^{-1}`` at ``x``."""
        w = self.invert(x, seed)
        f1 = self._d(w, 1)
        f2 = self._d(w, 2)
        return w, 1 / f1, -f2 / f1**3

    def boundary(self, samples: int) -> np.ndarray:
        """Closed polyline ``f(exp(2 pi i k / M))`` for ``k = 0..M``."""
        k = np.arange(samples + 1)
        w = np.exp(2j * np.pi * k / samples)
        w[-1] = w[0]
        return self._f(w)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "x0": [self.x0.real, self.x0.imag], "label": self.label}
        if self.kind == "polynomial":
            out["coeffs"] = [[c.real, c.imag] for c in self.coeffs]
        if self.kind == "regular_polygon":
            out["n"] = self.n
            out["scale"] = [self.scale.real, self.scale.imag]
        if self.allow_unproven:
            out["allow_unproven"] = True
        return out

    @classmethod
    def from_dict(cls, spec: dict) -> "ConformalMap":
        def cplx(v, default=0j):
            if v is None:
                return default
            if isinstance(v, (int, float)):
                return complex(v)
            re, im = v
            return complex(float(re), float(im))

        kind = spec.get("kind")
        if kind not in ("identity", "polynomial", "regular_polygon"):
            raise ValueError(f"unknown domain kind {kind!r}")
        return cls(
            kind=kind,
            coeffs=tuple(cplx(c) for c in spec.get("coeffs", ())),
            x0=cplx(spec.get("x0")),
            n=int(spec.get("n", 0)),
            scale=cplx(spec.get("scale"), 1 + 0j),
            label=str(spec.get("label", "")),
            allow_unproven=bool(spec.get("allow_unproven", False)),
        )


# ----------------------------------------------------------------------
# constructors
def identity_map(label: str = "disk") -> ConformalMap:
    return ConformalMap(kind="identity", label=label)


def polynomial_map(coeffs: Sequence[complex], x0: complex = 0j, label: str = "",
                   allow_unproven: bool = False) -> ConformalMap:
    """``f(w) = x0 + sum_k coeffs[k-1] w**k`` (coefficients from degree 1)."""
    return ConformalMap(kind="polynomial", coeffs=tuple(coeffs), x0=x0, label=label,
                        allow_unproven=allow_unproven)


def sc_regular_polygon(n: int, scale: complex = 1 + 0j, x0: complex = 0j,
                       label: str = "") -> ConformalMap:
    """Schwarz-Christoffel map of the disk onto the regular ``n``-gon.

    ``f'(z) = c prod_k (1 - z w_n^{-k})^(1 - 2/n) = c (1 - z^n)^(1 - 2/n)``
    with ``c`` chosen so that the vertices are the ``n``-th roots of unity.
    """
    if n < 3:
        raise ValueError("regular polygon needs n >= 3")
    return ConformalMap(kind="regular_polygon", n=n, scale=scale, x0=x0,
                        label=label or f"polygon-{n}")


def check_injectivity(fmap: ConformalMap) -> Certificate:
    """Sufficient coefficient test ``|a1| > sum_{k>=2} k |a_k|``."""
    if fmap.kind != "polynomial":
        return "proven"
    a1 = abs(fmap.coeffs[0])
    rest = sum(k * abs(c) for k, c in enumerate(fmap.coeffs[1:], start=2))
    return "proven" if a1 > rest else "unproven"


def require_usable(fmap: ConformalMap) -> None:
    if check_injectivity(fmap) != "proven" and not fmap.allow_unproven:
        raise PreconditionError(
            f"map {fmap.label!r} is not certified injective; set allow_unproven to use it"
        )


def normalized_derivatives_at(fmap: ConformalMap, w0: complex,
                              rotation: complex = 1 + 0j) -> tuple[complex, complex, complex]:
    """First three derivatives at ``x0 = f(w0)`` of ``T = rotation * phi(f^{-1})``.

    ``phi(z) = (z - w0) / (1 - conj(w0) z)`` so that ``T(x0) = 0``.  The
    chain rule runs through the inverse-function derivatives of ``f`` at
    ``w0`` and the automorphism derivatives at ``w0``.
    """
    w0 = complex(w0)
    if abs(w0) >= 1:
        raise ValueError("normalization point must lie in the open unit disk")
    f1, f2, f3 = (complex(fmap._d(w0, k)) for k in (1, 2, 3))
    s1 = 1 / f1
    s2 = -f2 / f1**3
    s3 = (3 * f2**2 - f1 * f3) / f1**5
    c = w0.conjugate()
    s = 1 - abs(w0) ** 2
    p1, p2, p3 = 1 / s, 2 * c / s**2, 6 * c * c / s**3
    t1 = p1 * s1
    t2 = p2 * s1**2 + p1 * s2
    t3 = p3 * s1**3 + 3 * p2 * s1 * s2 + p1 * s3
    return rotation * t1, rotation * t2, rotation * t3


@dataclass(frozen=True)
class DomainModel:
    """A conformal map together with the normalization data at ``x0``.

    ``t1, t2, t3`` are ``T'(x0), T''(x0), T'''(x0)`` for the normalized
    Riemann map ``T`` with ``T(x0) = 0``.
    """

    map: ConformalMap
    x0: complex
    w0: complex
    t1: complex
    t2: complex
    t3: complex
    rotation: complex = 1 + 0j

    @property
    def inversion_tolerance(self) -> float:
        return self.map.inversion_tolerance

    @property
    def label(self) -> str:
        return self.map.label

    @classmethod
    def at(cls, fmap: ConformalMap, w0: complex = 0j, rotation: complex = 1 + 0j) -> "DomainModel":
        """Normalize ``fmap`` at the image of the disk point ``w0``."""
        w0 = complex(w0)
        t1, t2, t3 = normalized_derivatives_at(fmap, w0, rotation)
        if abs(t1) == 0:
            raise PreconditionError("conformal map has vanishing derivative")
        return cls(fmap, complex(fmap.eval(w0)), w0, t1, t2, t3, complex(rotation))

    @classmethod
    def at_point(cls, fmap: ConformalMap, x0: complex) -> "DomainModel":
        return cls.at(fmap, fmap.invert(complex(x0)))

    def normalized(self, x):
        """The normalized map ``T(x)`` (used by finite-difference checks)."""
        w = self.map.invert(x)
        return self.rotation * (w - self.w0) / (1 - self.w0.conjugate() * w)
