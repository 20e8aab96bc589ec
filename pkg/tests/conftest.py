from __future__ import annotations

import numpy as np
import pytest

from vortexlab import DomainModel, identity_map, polynomial_map, sc_regular_polygon


def quartic():
    return polynomial_map([40, 0, 0, 1], label="40z+z^4")


def cubic():
    return polynomial_map([1, 0, 0.1], label="z+0.1z^3")


MAP_FACTORIES = {
    "disk": lambda: identity_map("disk"),
    "quartic": quartic,
    "cubic": cubic,
    "pentagon": lambda: sc_regular_polygon(5),
}


@pytest.fixture(params=sorted(MAP_FACTORIES))
def test_domain(request) -> DomainModel:
    return DomainModel.at(MAP_FACTORIES[request.param]())


def interior_points(domain: DomainModel, count: int, radius: float = 0.9, seed: int = 1):
    """Images of random disk points with ``|w| <= radius``."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(count))
    w = r * np.exp(2j * np.pi * rng.random(count))
    return np.array([domain.map.eval(complex(v)) for v in w])


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
