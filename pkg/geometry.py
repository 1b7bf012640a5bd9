"""
Metric geometry of the flat connection defined by the frame: the pulled-back
metric, torsion and its covariant derivative, and retrivializations rho -> rho Q.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from algebra import bracket, maurer_cartan, skew_associator
from core import (InnerProduct, Point, RankDeficiencyError, Tolerances, algebra_element, basis, inner,
                  project_blocks)
from flow import flow
from manifolds import ManifoldDescriptor, ParallelizedManifold, frame

logger = logging.getLogger(__name__)

ILL_CONDITIONED = 1e8


def _ip(manifold, ip):
    return ip or InnerProduct.identity(manifold.dim)


def pullback_metric(manifold, s, v, w, ip=None, tol=None):
    """g_s(v, w) = <theta_s(v), theta_s(w)> for tangent vectors v, w at s."""
    ip = _ip(manifold, ip)
    return inner(maurer_cartan(manifold, s, v, tol), maurer_cartan(manifold, s, w, tol), ip)


def torsion(manifold, s, xi, eta, tol=None):
    """T(rho xi, rho eta) = rho(b(xi, eta)), as an ambient tangent vector."""
    return frame(manifold, s, tol).apply(bracket(manifold, s, xi, eta, tol))


def nabla_torsion(manifold, s, xi, eta, direction, tol=None, method='auto'):
    """(nabla_{rho direction} T)(rho xi, rho eta) = rho(a(direction; xi, eta))."""
    return frame(manifold, s, tol).apply(skew_associator(manifold, s, direction, xi, eta, tol, method))


def skew_adjoint_residual(manifold, s, xi, eta, gamma, ip=None, tol=None):
    """<b(xi, eta), gamma> + <eta, b(xi, gamma)>; zero when the torsion is totally skew."""
    ip = _ip(manifold, ip)
    return (inner(bracket(manifold, s, xi, eta, tol), gamma, ip)
            + inner(eta, bracket(manifold, s, xi, gamma, tol), ip))


def torsion_metric_residual(manifold, s, xi, eta, gamma, ip=None, tol=None):
    """|g(T(X, Y), Z) - <b(xi, eta), gamma>| with X, Y, Z the fields of xi, eta, gamma."""
    ip = _ip(manifold, ip)
    z = frame(manifold, s, tol).apply(gamma)
    lhs = pullback_metric(manifold, s, torsion(manifold, s, xi, eta, tol), z, ip, tol)
    return abs(lhs - inner(bracket(manifold, s, xi, eta, tol), gamma, ip))


def tangent_field(manifold, a):
    """Vector field p -> orthogonal projection of the constant ambient vector a onto T_p M."""
    a = np.asarray(a, dtype=float)

    def field(p):
        F = manifold.frame_matrix(p.ambient)
        return F @ np.linalg.lstsq(F, a, rcond=None)[0]
    return field


def metricity_residual(manifold, s, field_x, field_y, direction, ip=None, tol=None):
    """Product rule of the connection along the flow of rho(direction).

    Compares d/dt g(X, Y) with g(nabla X, Y) + g(X, nabla Y), where nabla is the
    flat connection for which fundamental fields are parallel.
    """
    tol = tol or Tolerances()
    ip = _ip(manifold, ip)
    direction = algebra_element(direction, manifold.dim)
    h = tol.fd_step_2
    ahead = flow(manifold, direction, s, h, tol).endpoint
    behind = flow(manifold, direction, s, -h, tol).endpoint

    def coeffs(field, p):
        return maurer_cartan(manifold, p, field(p), tol)

    d_metric = (pullback_metric(manifold, ahead, field_x(ahead), field_y(ahead), ip, tol)
                - pullback_metric(manifold, behind, field_x(behind), field_y(behind), ip, tol)) / (2 * h)
    dx = (coeffs(field_x, ahead) - coeffs(field_x, behind)) / (2 * h)
    dy = (coeffs(field_y, ahead) - coeffs(field_y, behind)) / (2 * h)
    rhs = inner(dx, coeffs(field_y, s), ip) + inner(coeffs(field_x, s), dy, ip)
    return abs(d_metric - rhs)


def fundamental_norm_drift(manifold, xi, s, times, ip=None, tol=None):
    """Largest |g(rho xi, rho xi) - <xi, xi>| along the flow of rho(xi)."""
    ip = _ip(manifold, ip)
    xi = algebra_element(xi, manifold.dim)
    target = inner(xi, xi, ip)
    drift = 0.0
    for t in times:
        p = flow(manifold, xi, s, t, tol).endpoint
        v = manifold.frame_matrix(p.ambient) @ xi
        drift = max(drift, abs(pullback_metric(manifold, p, v, v, ip, tol) - target))
    return drift


###############################################################################
# Retrivialization
###############################################################################


@dataclass(frozen=True)
class QField:
    """Smooth map from points to invertible n x n matrices."""

    evaluator: Callable[[Point], np.ndarray]

    def at(self, p):
        Q = np.asarray(self.evaluator(p), dtype=float)
        cond = np.linalg.cond(Q)
        if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
            raise RankDeficiencyError('retrivialization matrix is singular at %r' % (p,))
        if cond > ILL_CONDITIONED:
            logger.warning('retrivialization matrix is ill-conditioned at %r (cond %.2e)', p, cond)
        return Q

    @classmethod
    def constant(cls, Q):
        Q = np.array(Q, dtype=float)
        return cls(lambda p: Q)


class Retrivialization(ParallelizedManifold):
    """The same manifold with frame rho~(xi) = rho(Q xi)."""

    def __init__(self, base, qfield, label='q'):
        self.base = base
        self.qfield = qfield
        d = base.descriptor
        super().__init__(ManifoldDescriptor('%s~%s' % (d.id, label), d.intrinsic_dim, d.ambient_dim,
                                            d.blocks, 'retrivialized'))

    def frame_matrix(self, y):
        y = np.asarray(y, dtype=float)
        Q = self.qfield.at(Point(y, self.base.id))
        if Q.shape != (self.dim, self.dim):
            raise ValueError('retrivialization matrix has shape %s, expected %d x %d'
                             % (Q.shape, self.dim, self.dim))
        return self.base.frame_matrix(y) @ Q

    def base_point(self, p):
        return Point(p.ambient, self.base.id)

    def point(self, p):
        return Point(p.ambient, self.id)


def retrivialize(manifold, qfield, label='q'):
    if not isinstance(qfield, QField):
        qfield = QField.constant(qfield)
    return Retrivialization(manifold, qfield, label)


def retrivialization_bracket_residual(retriv, s, xi, eta, tol=None):
    """Compare the bracket of rho Q with the transformation law

        [xi, eta]~ = Q^-1 b(Q xi, Q eta) - Q^-1 ((d_{rho~ xi} Q) eta - (d_{rho~ eta} Q) xi)

    where d_v Q is a central difference of Q along the ambient vector v.
    s is a point of the retrivialized manifold.
    """
    tol = tol or Tolerances()
    n = retriv.dim
    xi = algebra_element(xi, n)
    eta = algebra_element(eta, n)
    base = retriv.base
    sb = retriv.base_point(s)
    blocks = retriv.descriptor.blocks
    Q = retriv.qfield.at(sb)
    F = retriv.frame_matrix(s.ambient)
    h = tol.fd_step_1

    def dQ(v):
        ahead = Point(project_blocks(blocks, s.ambient + h * v), base.id)
        behind = Point(project_blocks(blocks, s.ambient - h * v), base.id)
        return (retriv.qfield.at(ahead) - retriv.qfield.at(behind)) / (2 * h)

    lhs = bracket(retriv, s, xi, eta, tol)
    law = bracket(base, sb, Q @ xi, Q @ eta, tol) - (dQ(F @ xi) @ eta - dQ(F @ eta) @ xi)
    return float(np.linalg.norm(lhs - np.linalg.solve(Q, law)))


def skew_adjoint_profile(manifold, s, ip=None, tol=None):
    """Table r[i, j, k] of skew_adjoint_residual on basis triples."""
    n = manifold.dim
    r = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                r[i, j, k] = skew_adjoint_residual(manifold, s, basis(n, i), basis(n, j), basis(n, k), ip, tol)
    return r
