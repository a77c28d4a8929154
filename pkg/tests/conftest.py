import logging

import numpy as np
import pytest

from torsionfield.geometry import MANIFOLDS, flat_torus, get_manifold, half_plane, sphere
from torsionfield.randomField import FieldSpec, noiseless_realization, sample_realization


log = logging.getLogger(__name__)
logging.basicConfig(format='%(asctime)s [%(levelname)s] [%(name)s(%(filename)s:%(lineno)d)] - %(message)s', level=logging.INFO)

TEST_TRUNCATION = 16

def samplePoints(manifold, count=20, seed=3):
    """
    Interior points away from the poles and the half plane boundary
    """
    rng = np.random.default_rng(seed)
    points = manifold.sample_points(rng, count, margin=0.5)
    if manifold.name == "half-plane":
        points[:, 0] = rng.uniform(-3.0, 3.0, count)
        points[:, 1] = rng.uniform(0.5, 5.0, count)
    return points

@pytest.fixture(scope="module")
def torus():
    return flat_torus()

@pytest.fixture(scope="module")
def unitSphere():
    return sphere()

@pytest.fixture(scope="module")
def halfPlane():
    return half_plane()

@pytest.fixture(scope="module")
def torusSpec(torus):
    return FieldSpec(torus, truncation=TEST_TRUNCATION)

@pytest.fixture(scope="module")
def sphereSpec(unitSphere):
    return FieldSpec(unitSphere, truncation=TEST_TRUNCATION)

@pytest.fixture(scope="module")
def torusRealization(torusSpec):
    """
    Seeded realization on the flat torus
    """
    return sample_realization(torusSpec, 11)

@pytest.fixture(scope="module")
def sphereRealization(sphereSpec):
    """
    Seeded realization on the unit sphere
    """
    return sample_realization(sphereSpec, 7)

@pytest.fixture(scope="module")
def setup(manifoldName):
    """
    Manifold, field law, usable realization and sample points for one
    built in manifold
    """
    manifold = get_manifold(manifoldName)
    spec = FieldSpec(manifold, truncation=TEST_TRUNCATION)
    realization = sample_realization(spec, 5)
    if realization.degenerate:
        realization = noiseless_realization(spec)
    return manifold, spec, realization, samplePoints(manifold)

def pytest_generate_tests(metafunc):
    if "manifoldName" in metafunc.fixturenames:
        metafunc.parametrize("manifoldName", sorted(MANIFOLDS), scope="module")
