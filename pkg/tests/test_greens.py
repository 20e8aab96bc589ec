from __future__ import annotations

import math

import numpy as np
import pytest

from vortexlab import (
    DomainError,
    DomainModel,
    PreconditionError,
    SingularityError,
    VortexSystem,
    find_stationary_points,
    grad_gamma_x,
    grad_robin,
    green,
    hessian_robin_at_stationary,
    identity_map,
    lemdev_ratio,
    robin,
    robin_hessian_fd,
    sc_regular_polygon,
    velocity,
)
from vortexlab.greens import TWO_PI

from .conftest import MAP_FACTORIES, cubic, interior_points, quartic

DISK = DomainModel.at(identity_map())


def fd_grad(fn, x, h=1e-6):
    return complex((fn(x + h) - fn(x - h)) / (2 * h), (fn(x + 1j * h) - fn(x - 1j * h)) / (2 * h))


def test_disk_green_closed_forms():
    assert green(DISK, 0.5, 0).value == pytest.approx(math.log(0.5) / TWO_PI, abs=1e-12)
    assert green(DISK, 0.5, -0.5).value == pytest.approx(-math.log(1.25) / TWO_PI, abs=1e-12)


def test_green_split_is_exact():
    g = green(DOMAIN_Q, 0.3 + 0.2j, -1.5j)
    assert g.value == g.log_term + g.gamma_term


DOMAIN_Q = DomainModel.at(quartic())


def test_green_singular_and_outside():
    with pytest.raises(SingularityError):
        green(DISK, 0.3, 0.3)
    with pytest.raises(DomainError):
        green(DISK, 1.5, 0.1)


def test_grad_gamma_examples():
    assert grad_gamma_x(DISK, 0, 0) == 0
    y = 0.1
    gamma = lambda x: green(DISK, x, y).value - math.log(abs(x - y)) / TWO_PI
    assert abs(grad_gamma_x(DISK, 0.3, y) - fd_grad(gamma, 0.3)) < 1e-7


def test_grad_gamma_diagonal_is_half_grad_robin():
    x = 4.0 + 3.0j
    assert grad_gamma_x(DOMAIN_Q, x, x) == pytest.approx(0.5 * grad_robin(DOMAIN_Q, x), abs=1e-15)


def test_robin_examples():
    assert robin(DISK, 0) == 0
    assert robin(DISK, 0.5j) == pytest.approx(-math.log(0.75) / TWO_PI, abs=1e-14)
    assert robin(DOMAIN_Q, 0) == pytest.approx(math.log(1 / 40) / TWO_PI, abs=1e-14)
    with pytest.raises(DomainError):
        robin(DISK, 2.0)


def test_grad_robin_examples():
    assert grad_robin(DISK, 0.5) == pytest.approx(0.5 / (math.pi * 0.75), abs=1e-14)
    assert abs(grad_robin(DISK, 0.5) - 0.212207) < 1e-6
    for name, factory in MAP_FACTORIES.items():
        dom = DomainModel.at(factory())
        assert abs(grad_robin(dom, dom.x0)) < 1e-10, name


def test_hessian_examples():
    h = hessian_robin_at_stationary(DISK)
    assert np.allclose(h.matrix, np.eye(2) / math.pi, atol=1e-15)
    assert (h.mu2, h.p, h.q) == (1, 0, 0)
    h = hessian_robin_at_stationary(DomainModel.at(cubic()))
    assert h.mu2 == pytest.approx(1, abs=1e-14)
    assert h.p**2 + h.q**2 == pytest.approx(0.36, abs=1e-13)


def test_hessian_requires_stationary_point():
    with pytest.raises(PreconditionError):
        hessian_robin_at_stationary(DomainModel.at(quartic(), 0.3))


def test_velocity_self_term_example():
    sys = VortexSystem(np.array([0.5 + 0j]), np.array([1.0]))
    v = velocity(DISK, sys, 0.5 + 0j, exclude=0)
    assert abs(v - 0.106103j) < 1e-6
    assert v == pytest.approx(0.5j * grad_robin(DISK, 0.5), abs=1e-15)
    with pytest.raises(SingularityError):
        velocity(DISK, sys, 0.5 + 0j)


def test_velocity_two_vortices_disk_matches_closed_form():
    sys = VortexSystem(np.array([0.3 + 0j, -0.2j]), np.array([1.0, -0.5]))
    x = 0.1 + 0.1j
    expected = 0j
    for z, a in zip(sys.positions, sys.masses):
        d = x - z
        free = 1j * d / (TWO_PI * abs(d) ** 2)
        gam = lambda xx, z=z: green(DISK, xx, z).value - math.log(abs(xx - z)) / TWO_PI
        expected += a * (free + 1j * fd_grad(gam, x))
    assert abs(velocity(DISK, sys, x) - expected) < 1e-8


def test_green_symmetry(test_domain):
    pts = interior_points(test_domain, 400, radius=0.9, seed=3)
    for x, y in zip(pts[::2], pts[1::2]):
        assert abs(green(test_domain, x, y).value - green(test_domain, y, x).value) < 1e-12


def test_green_sign_and_boundary_decay(test_domain):
    fmap = test_domain.map
    y = fmap.eval(0.1 + 0.05j)
    for x in interior_points(test_domain, 50, radius=0.95, seed=5):
        if abs(x - y) > 1e-6:
            assert green(test_domain, x, y).value < 0
    for theta in np.linspace(0, 2 * np.pi, 13)[:-1]:
        x = fmap.eval(complex((1 - 5e-4) * np.exp(1j * theta)))
        assert abs(green(test_domain, x, y).value) < 5e-3


def test_grad_gamma_matches_finite_differences(test_domain):
    pts = interior_points(test_domain, 12, radius=0.8, seed=11)
    scale = abs(test_domain.map.derivative(0, 1))
    for x, y in zip(pts[::2], pts[1::2]):
        gamma = lambda xx: green(test_domain, xx, y).value - math.log(abs(xx - y)) / TWO_PI
        h = 1e-6 * scale
        fd = fd_grad(gamma, x, h)
        # absolute 1e-7 in disk units, scaled by the map's length scale
        assert abs(grad_gamma_x(test_domain, x, y) - fd) * scale < 1e-7 * max(1.0, abs(fd) * scale)


def test_grad_robin_matches_finite_differences(test_domain):
    for x in interior_points(test_domain, 10, radius=0.85, seed=13):
        h = 1e-5 * abs(test_domain.map.derivative(0, 1))
        fd = fd_grad(lambda xx: robin(test_domain, xx), x, h)
        g = grad_robin(test_domain, x)
        assert abs(g - fd) <= 1e-7 * max(abs(g), 1.0 / h * 1e-5)


def test_composition_rule(test_domain):
    fmap = test_domain.map
    for x in interior_points(test_domain, 50, radius=0.85, seed=17):
        w = fmap.invert(x)
        t_prime = 1 / fmap.derivative(w, 1)
        disk_grad = w / (math.pi * (1 - abs(w) ** 2))
        h = 1e-6 * abs(fmap.derivative(0, 1))
        hfun = lambda xx: -math.log(1 - abs(fmap.invert(xx)) ** 2) / TWO_PI
        fd = fd_grad(hfun, x, h)
        pred = t_prime.conjugate() * disk_grad
        assert abs(fd - pred) < 1e-7 * max(1.0, abs(pred))


def test_stationarity_equivalence(test_domain):
    for rep in find_stationary_points(test_domain.map):
        dom = DomainModel.at(test_domain.map, rep.disk_preimage)
        by_grad = abs(grad_robin(dom, rep.location)) < 1e-9
        by_t2 = abs(dom.t2) < 1e-9 * abs(dom.t1)
        assert by_grad and by_t2


def test_hessian_against_finite_differences(test_domain):
    h = hessian_robin_at_stationary(test_domain)
    fd = robin_hessian_fd(test_domain, test_domain.x0, h=1e-3 * abs(test_domain.map.derivative(0, 1)))
    assert np.allclose(h.matrix, h.matrix.T)
    assert np.max(np.abs(fd - h.matrix)) <= 1e-4 * np.max(np.abs(h.matrix))


def test_hessian_trace(test_domain):
    h = hessian_robin_at_stationary(test_domain)
    assert np.trace(h.matrix) > 0
    # half-Hessian trace equals mu2/pi
    assert 0.5 * np.trace(h.matrix) == pytest.approx(h.mu2 / math.pi, rel=1e-10)


def test_lemdev_limit_for_cubic():
    res = lemdev_ratio(DomainModel.at(cubic()), 0.025, 2000, 1)
    target = -0.6 / (6 * math.pi)
    assert abs(res.limit_coeff - target) < 0.1 * abs(target)
    assert res.expected_limit == pytest.approx(target, abs=1e-12)


def test_lemdev_valid_domain_vanishing_limit():
    dom = DomainModel.at(quartic())
    for delta in (0.4, 0.2):
        res = lemdev_ratio(dom, delta, 500, 2)
        assert abs(res.limit_coeff) <= 1e-4 * delta


def test_lemdev_triangle_rate():
    dom = DomainModel.at(sc_regular_polygon(3))
    sups = [lemdev_ratio(dom, d, 2000, 2024).sup_ratio for d in (0.2, 0.1, 0.05)]
    for a, b in zip(sups, sups[1:]):
        assert 0.35 <= b / a <= 0.75


def test_lemdev_delta_too_large():
    with pytest.raises(PreconditionError):
        lemdev_ratio(DISK, 1.5, 10, 0)


@pytest.mark.parametrize("factory", [quartic, cubic])
def test_gamma_x0_expansion(factory):
    # 2pi grad_x gamma(x0, y) = conj(t3/(6 t1) h) + |t1|^2 h + O(h^2), h = y - x0
    dom = DomainModel.at(factory())
    scale = abs(dom.map.derivative(0, 1))
    errs = []
    for h in (0.2, 0.1, 0.05):
        hh = h * scale * np.exp(0.3j)
        lin = (dom.t3 / (6 * dom.t1) * hh).conjugate() + abs(dom.t1) ** 2 * hh
        errs.append(abs(TWO_PI * grad_gamma_x(dom, dom.x0, dom.x0 + hh) - lin))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0
