import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import flow
from conftest import sc2_point
from core import OffManifoldError, Point


def test_flow_at_time_zero_is_identity(sc2, rng):
    s = sc2.random_point(rng)
    result = flow.flow(sc2, [0.3, -0.2, 0.5], s, 0.0)
    assert result.endpoint is s
    assert result.steps_taken == 0


def test_product_closed_form_values(sc2):
    s = sc2_point(sc2, [1.0, 0.0, 0.0])
    p = flow.product(sc2, [0.0, 1.0, 0.0], s)
    assert_allclose(p.ambient, [0.648054, 0.761594, 0.0, 0.433781], atol=1e-6)


@pytest.mark.parametrize('xi, t, x', [
    ([0.0, 1.0, 0.0], 800.0, [0.0, 1.0, 0.0]),
    ([0.0, 2.0, 0.0], 400.0, [0.0, 1.0, 0.0]),
    ([0.0, 1.0, 0.0], -800.0, [0.0, -1.0, 0.0]),
])
def test_closed_form_flow_at_long_times(sc2, xi, t, x):
    s = sc2_point(sc2, [1.0, 0.0, 0.0])
    p = flow.product(sc2, np.multiply(xi, t), s)
    assert np.all(np.isfinite(p.ambient))
    assert_allclose(p.ambient[:3], x, atol=1e-12)
    # log cosh(800) = 800 - log 2 up to e^-1600
    assert sc2.distance(p, sc2_point(sc2, x, 800.0 - math.log(2.0))) < 1e-9
    q = flow.flow(sc2, xi, s, t).endpoint
    assert sc2.distance(p, q) < 1e-9


@pytest.mark.parametrize('t', [-3.0, -1.0, 0.5, 1.0, 3.0])
def test_integrator_matches_closed_form(sc2, rng, t):
    s = sc2.random_point(rng)
    xi = rng.uniform(-1.0, 1.0, 3)
    closed = flow.flow(sc2, xi, s, t, method='closed')
    numeric = flow.flow(sc2, xi, s, t, method='numeric')
    assert numeric.steps_taken > 0
    assert sc2.distance(closed.endpoint, numeric.endpoint) < 1e-8


def test_reparametrization(sc2, ssc, rng):
    for m in (sc2, ssc):
        s = m.random_point(rng)
        xi = rng.uniform(-1.0, 1.0, m.dim)
        assert flow.reparametrization_residual(m, xi, s, 0.7, 2.5) < 1e-8


@pytest.mark.parametrize('key', ['sphere_circle2', 'sphere_sphere_circle2_2', 's3', 'torus3'])
def test_one_parameter_law(key, rng):
    import manifolds
    m = manifolds.get(key)
    s = m.random_point(rng)
    xi = rng.uniform(-1.0, 1.0, m.dim)
    assert flow.one_parameter_residual(m, xi, s, 0.3, 0.4) < 1e-8


def test_left_translation_roundtrip(sc2, tol, rng):
    for _ in range(10):
        p = sc2.random_point(rng)
        xi = rng.uniform(-1.0, 1.0, 3)
        assert flow.translate_roundtrip_residual(sc2, xi, p) <= 10 * tol.point_tol


def test_left_translate_zero(sc2, rng):
    p = sc2.random_point(rng)
    assert sc2.distance(flow.left_translate(sc2, np.zeros(3), p), p) == 0.0


def test_torus_translation_wraps(torus3):
    s = torus3.project([6.0, 0.0, 1.0])
    p = flow.left_translate(torus3, [1.0, -0.5, 0.25], s)
    assert_allclose(p.ambient, [7.0 - 2 * math.pi, 2 * math.pi - 0.5, 1.25], atol=1e-12)


def test_quaternion_exponential(s3):
    p = flow.flow(s3, [1.0, 0.0, 0.0], s3.basepoint(), 0.7).endpoint
    assert_allclose(p.ambient, [math.cos(0.7), math.sin(0.7), 0.0, 0.0], atol=1e-12)
    numeric = flow.flow(s3, [1.0, 0.0, 0.0], s3.basepoint(), 0.7, method='numeric').endpoint
    assert s3.distance(p, numeric) < 1e-8


def test_numeric_flow_on_composite_stays_on_manifold(ssc, rng):
    from core import check_point, constraint_residual
    s = ssc.random_point(rng)
    result = flow.flow(ssc, rng.uniform(-1.0, 1.0, 5), s, 2.0)
    assert result.steps_taken > 0
    assert result.max_constraint_drift < 1e-8
    check_point(ssc, result.endpoint)
    assert constraint_residual(ssc.descriptor.blocks, result.endpoint.ambient) < 1e-14


def test_velocity_matches_frame(ssc, rng):
    s = ssc.random_point(rng)
    assert flow.velocity_residual(ssc, rng.uniform(-1.0, 1.0, 5), s, 0.4) < 1e-4


def test_flow_rejects_bad_input(sc2):
    with pytest.raises(OffManifoldError):
        flow.flow(sc2, [1.0, 0.0, 0.0], Point([2.0, 0.0, 0.0, 0.0], sc2.id), 1.0)
    with pytest.raises(ValueError):
        flow.flow(sc2, [1.0, 0.0, 0.0], sc2.basepoint(), 1.0, method='euler')


def test_closed_method_requires_closed_form(ssc):
    with pytest.raises(ValueError):
        flow.flow(ssc, np.ones(5), ssc.basepoint(), 1.0, method='closed')
    assert flow.closed_numeric_residual(ssc, np.ones(5), ssc.basepoint(), 1.0) is None
