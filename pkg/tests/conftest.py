import numpy as np
import pytest

from thurston.model import SpaceId, hpoint

SPACES = list(SpaceId)
PRODUCT_SPACES = [SpaceId.S2xR, SpaceId.H2xR]


def random_point(space, rng, box=1.0):
    """A proper point of ``space`` within a modest box around its origin."""
    space = SpaceId.parse(space)
    if space is SpaceId.S2xR:
        v = rng.normal(size=3)
        return hpoint(*(np.exp(rng.uniform(-box, box)) * v / np.linalg.norm(v)))
    if space is SpaceId.H2xR:
        yz = rng.uniform(-box, box, size=2)
        return hpoint(*(np.exp(rng.uniform(-box, box)) * np.array([np.sqrt(1 + yz @ yz), *yz])))
    if space is SpaceId.SL2R:
        from thurston.geodesics.metric import sl2r_from_chart

        return sl2r_from_chart(rng.uniform(0, box), rng.uniform(-np.pi, np.pi), rng.uniform(-1.0, 1.0))
    return hpoint(*rng.uniform(-box, box, size=3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
