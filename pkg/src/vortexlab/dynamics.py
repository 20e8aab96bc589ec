"""Kirchhoff-Routh point vortices and particle-discretized vortex blobs.

All integrators are fixed-step classical RK4.  Point systems and blobs
share one velocity kernel (:func:`vortexlab.greens.self_induced_velocities`),
so a one-particle blob and a single point vortex follow bit-identical
trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Literal, Sequence

import numpy as np

from .conformal import DomainModel
from .errors import BoundaryCollision, DomainError, PreconditionError, VortexCollapse
from .greens import (
    TWO_PI,
    distance_to_boundary,
    green_matrix,
    hessian_robin_at_stationary,
    robin_values,
    self_induced_velocities,
)

BOUNDARY_MARGIN = 1e-6
COLLISION_THRESHOLD = 1e-8

Profile = Literal["uniform_disk", "gaussian_truncated"]


def _frozen(arr, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class VortexSystem:
    positions: np.ndarray
    masses: np.ndarray
    time: float = 0.0
    preimages: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        pos = _frozen(np.atleast_1d(self.positions), complex)
        m = _frozen(np.atleast_1d(self.masses), float)
        if pos.shape != m.shape:
            raise ValueError("positions and masses must have the same length")
        if np.any(m == 0):
            raise ValueError("vortex masses must be nonzero")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(m))):
            raise ValueError("non-finite vortex data")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", m)

    @property
    def weights(self) -> np.ndarray:
        return self.masses


@dataclass(frozen=True)
class BlobState:
    """Equal-weight particle discretization of a vortex blob.

    ``total_mass`` is the float sum of the (immutable) weights; the requested
    mass and the particle-count rule live in ``metadata``.
    """

    positions: np.ndarray
    weights: np.ndarray
    epsilon: float
    beta: float
    x0: complex
    time: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)
    preimages: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        pos = _frozen(np.atleast_1d(self.positions), complex)
        w = _frozen(np.atleast_1d(self.weights), float)
        if pos.shape != w.shape or len(pos) == 0:
            raise ValueError("need one weight per particle and at least one particle")
        if not (np.all(w > 0) or np.all(w < 0)):
            raise ValueError("blob weights must share one strict sign")
        if not 0 < self.epsilon:
            raise ValueError("epsilon must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "x0", complex(self.x0))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def exit_radius(self) -> float:
        return self.epsilon**self.beta


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    B: complex
    I: float
    R: float
    H: float
    m4: float
    m8: float
    tail_radii: tuple[float, ...]
    tail_mass: tuple[float, ...]


@dataclass(frozen=True)
class ExitTimeResult:
    epsilon: float
    beta: float
    tau: float
    horizon: float
    steps: int
    dt: float
    domain_label: str
    horizon_reached: bool = False

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "beta": self.beta,
            "tau": "horizon_reached" if self.horizon_reached else self.tau,
            "horizon": self.horizon,
            "steps": self.steps,
            "dt": self.dt,
            "domain_label": self.domain_label,
        }


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    robin: np.ndarray


# ----------------------------------------------------------------------
# point vortices
def _check_state(domain: DomainModel, z: np.ndarray, a: np.ndarray, t: float,
                 what: str = "boundary collision") -> None:
    if np.any(np.abs(a) >= 1 - BOUNDARY_MARGIN):
        raise BoundaryCollision(what, t)
    if len(z) > 1:
        d = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min() < COLLISION_THRESHOLD:
            raise VortexCollapse("vortex collapse", t)


def _rk4_sources(domain: DomainModel, z: np.ndarray, weights: np.ndarray, seed, t: float,
                 dt: float, threads: int, rho: float, event: str):
    def rhs(pos, guess):
        try:
            u, a = self_induced_velocities(domain, pos, weights, guess, rho=rho, threads=threads)
        except DomainError:
            raise BoundaryCollision(event, t) from None
        _check_state(domain, pos, a, t, event)
        return u, a

    k1, a1 = rhs(z, seed)
    k2, a2 = rhs(z + 0.5 * dt * k1, a1)
    k3, a3 = rhs(z + 0.5 * dt * k2, a2)
    k4, a4 = rhs(z + dt * k3, a3)
    return z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), a4


def step_point_vortices(domain: DomainModel, sys: VortexSystem, dt: float, threads: int = 1,
                        rho: float = 0.0) -> VortexSystem:
    """One RK4 step of the Kirchhoff-Routh system."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    z, a = _rk4_sources(domain, sys.positions, sys.masses, sys.preimages, sys.time, dt,
                        threads, rho, "boundary collision")
    t = sys.time + dt
    w = domain.map.invert(z, a)
    _check_state(domain, z, w, t)
    return VortexSystem(z, sys.masses, t, w)


def hamiltonian(domain: DomainModel, positions: np.ndarray, masses: np.ndarray) -> float:
    """``sum_{i<j} a_i a_j G(z_i, z_j) + 1/2 sum_i a_i^2 robin(z_i)``."""
    z = np.asarray(positions, dtype=complex)
    m = np.asarray(masses, dtype=float)
    g = green_matrix(domain, z)
    pair = 0.5 * float(np.sum(m[:, None] * m[None, :] * g))
    return pair + 0.5 * float(np.sum(m**2 * robin_values(domain, z)))


def simulate_point_vortices(domain: DomainModel, sys: VortexSystem, dt: float, steps: int,
                            threads: int = 1) -> list[VortexSystem]:
    out = [sys]
    for _ in range(steps):
        sys = step_point_vortices(domain, sys, dt, threads)
        out.append(sys)
    return out


# ----------------------------------------------------------------------
# single vortex fast path (Python scalars)
def _single_rhs(fmap, mass: float):
    half = 0.5 * mass

    def rhs(z: complex, w_seed: complex):
        w = fmap._invert_scalar(z, w_seed)
        f1 = fmap._d(w, 1)
        f2 = fmap._d(w, 2)
        s1 = 1 / f1
        s2 = -f2 / (f1 * f1 * f1)
        m = abs(s1)
        g = s1.conjugate() * w / (math.pi * (1 - abs(w) ** 2)) + s1 * s2.conjugate() / (TWO_PI * m * m)
        return 1j * half * g, w

    return rhs


def _rk4_single(rhs, z: complex, w: complex, dt: float, t: float):
    try:
        k1, w1 = rhs(z, w)
        k2, w2 = rhs(z + 0.5 * dt * k1, w1)
        k3, w3 = rhs(z + 0.5 * dt * k2, w2)
        k4, w4 = rhs(z + dt * k3, w3)
    except DomainError:
        raise BoundaryCollision("boundary collision", t) from None
    if max(abs(w1), abs(w2), abs(w3), abs(w4)) >= 1 - BOUNDARY_MARGIN:
        raise BoundaryCollision("boundary collision", t)
    return z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), w4


def simulate_single_vortex(domain: DomainModel, z0: complex, dt: float, horizon: float,
                           record_every: int = 1, mass: float = 1.0) -> Trajectory:
    """RK4 trajectory of ``z' = (mass/2) grad^perp robin(z)`` with robin samples."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    fmap = domain.map
    rhs = _single_rhs(fmap, mass)
    z = complex(z0)
    w = fmap.invert(z)
    steps = int(math.floor(horizon / dt + 1e-9))
    rest = horizon - steps * dt
    times, pos = [0.0], [z]
    for k in range(1, steps + 1):
        z, w = _rk4_single(rhs, z, w, dt, (k - 1) * dt)
        if k % record_every == 0 or (k == steps and rest <= 1e-12 * dt):
            times.append(k * dt)
            pos.append(z)
    if rest > 1e-12 * dt:
        # land exactly on the horizon
        z, w = _rk4_single(rhs, z, w, rest, steps * dt)
        times.append(horizon)
        pos.append(z)
    pos_arr = np.array(pos)
    return Trajectory(np.array(times), pos_arr, robin_values(domain, pos_arr))


def exit_time_ode(rhs: Callable[[complex, complex], tuple[complex, complex]], z0: complex,
                  w0: complex, center: complex, radius: float, dt: float,
                  horizon: float) -> tuple[float, int, bool]:
    """First post-step time with ``|z - center| >= radius`` under RK4.

    ``rhs(z, aux) -> (velocity, aux)`` threads an auxiliary value (the disk
    preimage for conformal domains) between stages.  Returns
    ``(tau, steps, horizon_reached)``.
    """
    z, w = complex(z0), w0
    steps = int(math.floor(horizon / dt + 1e-9))
    for k in range(1, steps + 1):
        z, w = _rk4_single(rhs, z, w, dt, (k - 1) * dt)
        if abs(z - center) >= radius:
            return k * dt, k, False
    return math.inf, steps, True


def unstable_direction(domain: DomainModel) -> tuple[complex, float]:
    """Unit eigenvector and rate ``xi`` of the repelling direction at ``domain.x0``.

    The linearization of ``z' = grad^perp robin / 2`` at a stationary point is
    ``J = R (H/2)`` with ``R`` the quarter turn; its eigenvalues are
    ``+-sqrt(-lambda_+ lambda_-)``.
    """
    h = hessian_robin_at_stationary(domain)
    jac = np.array([[0.0, -1.0], [1.0, 0.0]]) @ (0.5 * h.matrix)
    vals, vecs = np.linalg.eig(jac)
    k = int(np.argmax(vals.real))
    xi = float(vals[k].real)
    if xi <= 0 or abs(vals[k].imag) > 1e-12 * max(1.0, abs(vals[k])):
        raise PreconditionError("stationary point is not unstable")
    v = vecs[:, k].real
    v = v / np.hypot(*v)
    return complex(v[0], v[1]), xi


def unstable_exit_experiment(domain: DomainModel, x0_unstable: complex,
                             epsilons: Sequence[float], beta: float, dt: float,
                             horizon: float) -> list[ExitTimeResult]:
    """Exit times of a single vortex started at ``x0 + eps e_+``.

    At a point that is not unstable the start is displaced along the softest
    Hessian axis instead; such runs normally end with ``horizon_reached``.
    """
    dom = DomainModel.at_point(domain.map, x0_unstable)
    try:
        e_plus, _ = unstable_direction(dom)
    except PreconditionError:
        vals, vecs = np.linalg.eigh(hessian_robin_at_stationary(dom).matrix)
        e_plus = complex(vecs[0, 0], vecs[1, 0])
    rhs = _single_rhs(dom.map, 1.0)
    out = []
    for eps in epsilons:
        z0 = dom.x0 + eps * e_plus
        tau, steps, reached = exit_time_ode(rhs, z0, dom.map.invert(z0), dom.x0, eps**beta,
                                            dt, horizon)
        out.append(ExitTimeResult(eps, beta, tau, horizon, steps, dt, dom.label, reached))
    return out


# ----------------------------------------------------------------------
# blobs
def _hex_offsets(n_target: int) -> np.ndarray:
    """Hexagonal lattice points (unit spacing) filling the smallest disk
    whose shell count is closest to ``n_target``."""
    k = int(math.ceil(math.sqrt(n_target))) + 3
    i, j = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
    pts = (i + 0.5 * j + 1j * (math.sqrt(3) / 2) * j).ravel()
    norms = np.abs(pts)
    shells = np.unique(np.round(norms, 9))
    counts = np.array([np.count_nonzero(norms <= s + 1e-9) for s in shells])
    best = int(np.argmin(np.abs(counts - n_target) - 1e-3 * (counts >= n_target)))
    r = shells[best]
    sel = pts[norms <= r + 1e-9]
    sel = sel[np.lexsort((np.angle(sel), np.abs(sel)))]
    return sel / r if r > 0 else sel


def init_blob(domain: DomainModel, x0: complex, epsilon: float, beta: float,
              n_particles: int, total_mass: float = 1.0, profile: Profile = "uniform_disk",
              rng_seed: int = 0, nu: float = 2.0, density_constant: float = 1.0) -> BlobState:
    """Equal-weight particles supported in ``D(x0, epsilon)``.

    ``uniform_disk`` uses the hexagonal lattice shell whose point count is
    closest to ``n_particles``; ``gaussian_truncated`` draws exactly
    ``n_particles`` i.i.d. points with sigma = epsilon/3, rejected outside the
    disk.
    """
    x0 = complex(x0)
    if n_particles < 1:
        raise PreconditionError("need at least one particle")
    if total_mass == 0:
        raise PreconditionError("total mass must be nonzero")
    if epsilon >= distance_to_boundary(domain, x0):
        raise PreconditionError("blob disk is not contained in the domain")
    if profile == "uniform_disk":
        offsets = _hex_offsets(n_particles) * epsilon * (1 - 1e-12) if n_particles > 1 else np.zeros(1, complex)
    elif profile == "gaussian_truncated":
        rng = np.random.default_rng(rng_seed)
        out: list[complex] = []
        while len(out) < n_particles:
            c = rng.normal(0.0, epsilon / 3, size=(2 * n_particles, 2))
            c = c[np.hypot(c[:, 0], c[:, 1]) < epsilon * (1 - 1e-12)]
            out.extend(c[:, 0] + 1j * c[:, 1])
        offsets = np.array(out[:n_particles])
    else:
        raise ValueError(f"unknown profile {profile!r}")
    n = len(offsets)
    weights = np.full(n, total_mass / n)
    meta = {
        "profile": profile,
        "requested_particles": n_particles,
        "n_particles": n,
        "requested_mass": total_mass,
        "nu": nu,
        "density_constant": density_constant,
        "min_particles_rule": math.ceil(epsilon ** (2 - nu) * density_constant),
        "rng_seed": rng_seed,
    }
    pos = x0 + offsets
    return BlobState(pos, weights, epsilon, beta, x0, 0.0, meta, domain.map.invert(pos))


def step_blob(domain: DomainModel, blob: BlobState, dt: float, threads: int = 1,
              rho: float = 0.0) -> BlobState:
    """One RK4 step; particle ``i`` moves with all mutual kernels ``j != i``
    and every regular-part term including its own."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    z, a = _rk4_sources(domain, blob.positions, blob.weights, blob.preimages, blob.time, dt,
                        threads, rho, "support reached boundary")
    t = blob.time + dt
    w = domain.map.invert(z, a)
    if np.any(np.abs(w) >= 1 - BOUNDARY_MARGIN):
        raise BoundaryCollision("support reached boundary", t)
    return replace(blob, positions=z, time=t, preimages=w)


def diagnostics(domain: DomainModel, blob: BlobState,
                tail_radii: Iterable[float] = ()) -> DiagnosticsRecord:
    """Center of vorticity, inertia, support radius, energy and moments."""
    z, w = blob.positions, blob.weights
    B = complex(np.sum(w * z) / np.sum(w))
    d = np.abs(z - B)
    d2 = d * d
    radii = tuple(float(r) for r in tail_radii)
    tails = tuple(float(np.sum(np.abs(w[d >= r]))) for r in radii)
    return DiagnosticsRecord(
        t=blob.time,
        B=B,
        I=float(np.sum(w * d2)),
        R=float(d.max()),
        H=hamiltonian(domain, z, w),
        m4=float(np.sum(w * d2 * d2)),
        m8=float(np.sum(w * d2**4)),
        tail_radii=radii,
        tail_mass=tails,
    )


@dataclass
class BlobRun:
    result: ExitTimeResult
    records: list[DiagnosticsRecord]
    final: BlobState
    event: str | None = None


def measure_exit_time(domain: DomainModel, blob0: BlobState, dt: float, horizon: float,
                      threads: int = 1, record_every: int = 0,
                      tail_radii: Sequence[float] = (), rho: float = 0.0) -> BlobRun:
    """Integrate the blob until ``max |x_i - x0| >= eps**beta`` or the horizon.

    Exit is checked after each step (resolution ``dt``).  With
    ``record_every > 0`` diagnostics are stored every that many steps, plus
    the initial and final states.
    """
    blob = blob0
    radius = blob0.exit_radius
    steps = int(math.floor(horizon / dt + 1e-9))
    records: list[DiagnosticsRecord] = []
    if record_every:
        records.append(diagnostics(domain, blob, tail_radii))
    for k in range(1, steps + 1):
        blob = step_blob(domain, blob, dt, threads, rho)
        exited = float(np.max(np.abs(blob.positions - blob0.x0))) >= radius
        if record_every and (k % record_every == 0 or exited or k == steps):
            records.append(diagnostics(domain, blob, tail_radii))
        if exited:
            res = ExitTimeResult(blob0.epsilon, blob0.beta, k * dt, horizon, k, dt, domain.label)
            return BlobRun(res, records, blob)
    res = ExitTimeResult(blob0.epsilon, blob0.beta, math.inf, horizon, steps, dt, domain.label,
                         horizon_reached=True)
    return BlobRun(res, records, blob)
