import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

import algebra
import manifolds
from conftest import sc2_point
from core import Tolerances, basis


def test_sphere_circle_bracket_values(sc2):
    s = sc2_point(sc2, [0.0, 0.0, 1.0])
    assert_allclose(algebra.bracket(sc2, s, basis(3, 0), basis(3, 2)), [1.0, 0.0, 0.0], atol=1e-14)
    assert_allclose(algebra.bracket(sc2, s, basis(3, 0), basis(3, 1)), [0.0, 0.0, 0.0], atol=1e-14)


def test_sphere_circle_bracket_formula(sc2, rng):
    # b(xi, eta) = <eta, x> xi - <xi, x> eta
    for _ in range(5):
        s = sc2.random_point(rng)
        x = sc2.sphere_part(s.ambient)
        xi, eta = rng.standard_normal(3), rng.standard_normal(3)
        assert_allclose(algebra.bracket(sc2, s, xi, eta), (eta @ x) * xi - (xi @ x) * eta, atol=1e-12)


def test_quaternion_bracket(s3, rng):
    for s in (s3.basepoint(), s3.random_point(rng)):
        assert_allclose(algebra.bracket(s3, s, basis(3, 0), basis(3, 1)), [0.0, 0.0, 2.0], atol=1e-12)
    assert algebra.constant_bracket_probe(s3, [s3.random_point(rng) for _ in range(4)]) < 1e-12


def test_torus_bracket_vanishes(torus3, rng):
    bt = algebra.bracket_tensor(torus3, torus3.random_point(rng))
    assert not np.any(bt.b)
    assert bt.method == 'closed'


@pytest.mark.parametrize('key', ['sphere_circle2', 'sphere_circle4', 'sphere_sphere_circle2_2', 's3'])
def test_closed_and_difference_brackets_agree(key, rng, tol):
    m = manifolds.get(key)
    for _ in range(5):
        s = m.random_point(rng)
        xi, eta = m.random_element(rng), m.random_element(rng)
        closed = algebra.bracket(m, s, xi, eta, method='closed')
        fd = algebra.bracket(m, s, xi, eta, method='fd')
        assert_allclose(closed, fd, atol=tol.check_tol_fd2)
        assert_allclose(closed, -algebra.bracket(m, s, eta, xi), atol=1e-12)


def test_bracket_tensor_is_antisymmetric(ssc, rng):
    bt = algebra.bracket_tensor(ssc, ssc.random_point(rng))
    assert_allclose(bt.b, -bt.b.transpose(1, 0, 2), atol=0)
    xi, eta = rng.standard_normal(5), rng.standard_normal(5)
    assert_allclose(bt(xi, eta), algebra.bracket(ssc, bt.basepoint, xi, eta), atol=1e-12)


def test_ad_matrix_columns(sc2, rng):
    s = sc2.random_point(rng)
    xi = rng.standard_normal(3)
    ad = algebra.ad_matrix(sc2, s, xi)
    eta = rng.standard_normal(3)
    assert_allclose(ad @ eta, algebra.bracket(sc2, s, xi, eta), atol=1e-12)


@pytest.mark.parametrize('key', ['sphere_circle2', 's3'])
def test_bracket_from_loop_commutator(key, rng, tol):
    m = manifolds.get(key)
    s = m.random_point(rng)
    xi, eta = m.random_element(rng), m.random_element(rng)
    assert_allclose(algebra.bracket_via_commutator(m, s, xi, eta), algebra.bracket(m, s, xi, eta),
                    atol=tol.check_tol_fd2)


def test_unknown_method(sc2):
    with pytest.raises(ValueError):
        algebra.bracket(sc2, sc2.basepoint(), basis(3, 0), basis(3, 1), method='exact')


def test_closed_method_unavailable(ssc):
    with pytest.raises(ValueError):
        algebra.skew_associator(ssc, ssc.basepoint(), basis(5, 0), basis(5, 1), basis(5, 2), method='closed')


def test_maurer_cartan(sc2, rng):
    s = sc2_point(sc2, [1.0, 0.0, 0.0])
    assert_allclose(algebra.maurer_cartan(sc2, s, [0.0, 1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-14)
    p = sc2.random_point(rng)
    xi = rng.standard_normal(3)
    v = manifolds.frame(sc2, p).apply(xi)
    assert_allclose(algebra.maurer_cartan(sc2, p, v), xi, atol=1e-12)


def test_maurer_cartan_rejects_normal_vectors(sc2):
    from core import OffManifoldError
    with pytest.raises(OffManifoldError):
        algebra.maurer_cartan(sc2, sc2_point(sc2, [1.0, 0.0, 0.0]), [1.0, 0.0, 0.0, 0.0])


@pytest.mark.parametrize('key', ['sphere_circle2', 'sphere_sphere_circle2_2', 's3'])
def test_structure_equation(key, rng, tol):
    m = manifolds.get(key)
    s = m.random_point(rng)
    residual = algebra.structure_equation_residual(m, s, m.random_element(rng), m.random_element(rng))
    assert residual.shape == (m.dim,)
    assert np.linalg.norm(residual) <= tol.check_tol_fd2


def test_sphere_circle_jacobi_holds(sc2, rng):
    s = sc2.random_point(rng)
    xi, eta, gamma = (rng.standard_normal(3) for _ in range(3))
    assert_allclose(algebra.jacobi_residual(sc2, s, xi, eta, gamma), 0.0, atol=1e-12)


def test_composite_jacobi_fails_but_generalized_holds(ssc, rng, tol):
    s = ssc.random_point(rng)
    worst = max(np.linalg.norm(algebra.jacobi_residual(ssc, s, basis(5, i), basis(5, j), basis(5, k)))
                for i, j, k in itertools.combinations(range(5), 3))
    assert worst > 1e-3
    xi, eta, gamma = (ssc.random_element(rng) for _ in range(3))
    assert np.linalg.norm(algebra.generalized_jacobi_residual(ssc, s, xi, eta, gamma)) <= tol.check_tol_fd2


def test_composite_jacobi_defect(ssc, rng):
    # J(e_i, e_j, e_A) = y_A (x_j e_i - x_i e_j) for sphere indices i, j and base index A
    points = [ssc.random_point(rng),
              ssc.project(np.concatenate([rng.standard_normal(3), [1.0, 0.0, 0.0], [0.4]]))]
    for s in points:
        x, y = s.ambient[:3], s.ambient[3:6]
        for i, j in itertools.combinations(range(3), 2):
            for k in (3, 4):
                expected = y[k - 2] * (x[j] * basis(5, i) - x[i] * basis(5, j))
                residual = algebra.jacobi_residual(ssc, s, basis(5, i), basis(5, j), basis(5, k))
                assert_allclose(residual, expected, atol=1e-6)
    assert_allclose(points[1].ambient[3:6], [1.0, 0.0, 0.0])


def test_associator_closed_value(sc2):
    s = sc2_point(sc2, [0.0, 0.0, 1.0])
    a = algebra.skew_associator(sc2, s, basis(3, 0), basis(3, 0), basis(3, 1))
    assert_allclose(a, [0.0, -1.0, 0.0], atol=1e-14)
    zero = algebra.skew_associator(sc2, s, basis(3, 2), basis(3, 0), basis(3, 1))
    assert_allclose(zero, 0.0, atol=1e-14)


def test_associator_closed_matches_differences(sc2, rng, tol):
    for _ in range(3):
        s = sc2.random_point(rng)
        d, xi, eta = (sc2.random_element(rng) for _ in range(3))
        closed = algebra.skew_associator(sc2, s, d, xi, eta, method='closed')
        fd = algebra.skew_associator(sc2, s, d, xi, eta, method='fd')
        assert_allclose(closed, fd, atol=tol.check_tol_fd2)


def test_associator_tensor_orientation(sc2, rng):
    s = sc2.random_point(rng)
    at = algebra.associator_tensor(sc2, s)
    d, xi, eta = (rng.standard_normal(3) for _ in range(3))
    assert_allclose(at(d, xi, eta), algebra.skew_associator(sc2, s, d, xi, eta), atol=1e-12)
    assert_allclose(at.a, -at.a.transpose(0, 2, 1, 3), atol=0)


def test_group_associator_vanishes(s3, torus3, rng):
    for m in (s3, torus3):
        assert not np.any(algebra.associator_tensor(m, m.random_point(rng)).a)


def test_associator_bracket_skew_part(sc2, rng, tol):
    s = sc2.random_point(rng)
    xi, eta, gamma = (rng.uniform(-1.0, 1.0, 3) for _ in range(3))
    skew = algebra.associator_bracket(sc2, s, xi, eta, gamma) - algebra.associator_bracket(sc2, s, eta, xi, gamma)
    assert_allclose(skew, algebra.skew_associator(sc2, s, gamma, xi, eta), atol=tol.check_tol_fd3)


def test_associator_bracket_vanishes_on_groups(s3, rng):
    xi, eta, gamma = (rng.uniform(-1.0, 1.0, 3) for _ in range(3))
    assert_allclose(algebra.associator_bracket(s3, s3.random_point(rng), xi, eta, gamma), 0.0, atol=1e-4)


@pytest.mark.parametrize('key', ['sphere_circle2', 'sphere_circle4', 's3', 'torus3'])
def test_lts_closed(key, rng):
    m = manifolds.get(key)
    report = algebra.lts_residuals(m, m.random_point(rng), method='closed')
    assert report.method == 'closed'
    assert report.worst <= 1e-10


def test_lts_differences_on_sphere_circle(sc2, rng, tol):
    report = algebra.lts_residuals(sc2, sc2.random_point(rng), method='fd')
    assert report.worst <= tol.check_tol_fd3


def test_composite_triple_is_not_cyclic(ssc, rng):
    report = algebra.lts_residuals(ssc, ssc.random_point(rng))
    assert report.method == 'fd'
    assert report.skew <= 1e-12
    assert report.cyclic > 1e-3


def test_semidirect_homomorphism(sc2, rng):
    for _ in range(5):
        s = sc2.random_point(rng)
        xi, eta = rng.standard_normal(3), rng.standard_normal(3)
        assert algebra.semidirect_homomorphism_residual(sc2, s, xi, eta) < 1e-12
    with pytest.raises(ValueError):
        algebra.semidirect_homomorphism_residual(manifolds.get('s3'), manifolds.get('s3').basepoint(),
                                                 basis(3, 0), basis(3, 1))


def test_strict_tolerances_accepted(sc2, rng):
    s = sc2.random_point(rng)
    tol = Tolerances(point_tol=1e-12, newton_tol=1e-12)
    assert_allclose(algebra.bracket(sc2, s, basis(3, 0), basis(3, 1), tol),
                    algebra.bracket(sc2, s, basis(3, 0), basis(3, 1)), atol=0)
