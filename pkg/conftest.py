import numpy as np
import pytest

import manifolds
from core import Tolerances


@pytest.fixture
def tol():
    return Tolerances()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def sc2():
    return manifolds.get('sphere_circle2')


@pytest.fixture
def ssc():
    return manifolds.get('sphere_sphere_circle2_2')


@pytest.fixture
def s3():
    return manifolds.get('s3')


@pytest.fixture
def torus3():
    return manifolds.get('torus3')


def sc2_point(sc2, x, phi=0.0):
    return sc2.project(np.append(np.asarray(x, dtype=float), phi))


def small(rng, n, radius):
    v = rng.standard_normal(n)
    return v * (radius * rng.uniform(0.3, 1.0) / np.linalg.norm(v))
