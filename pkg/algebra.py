"""
Brackets and associators of the frame.

Conventions, with frame rho and coefficients in the basis {e_i} (0-based):
    b_s(xi, eta) = -rho_s^{-1} [rho(xi), rho(eta)](s)
    a_s(d; xi, eta) = derivative of b(xi, eta) along the flow of rho(d) at s
BracketTensor.b[i, j] holds b(e_i, e_j); AssociatorTensor.a[d, i, j] holds
a(e_d; e_i, e_j).
"""

import logging
from dataclasses import dataclass

import numpy as np

from core import (OffManifoldError, Point, Tolerances, algebra_element, basis, check_point, solve_frame,
                  tangent_residual)
from flow import flow
from loops import DEFAULT_TRUST_RADIUS, local_product
from manifolds import SphereCircle, frame

logger = logging.getLogger(__name__)

BRACKET_TANGENCY_TOL = 1e-6
METHODS = ('auto', 'closed', 'fd')


def _resolve(method, available, what):
    if method not in METHODS:
        raise ValueError('unknown method %r' % method)
    if method == 'closed' and not available:
        raise ValueError('no closed-form %s available' % what)
    return 'closed' if method == 'auto' and available else ('fd' if method == 'auto' else method)


@dataclass(frozen=True, eq=False)
class BracketTensor:
    b: np.ndarray
    basepoint: Point
    method: str

    def __call__(self, xi, eta):
        return np.einsum('i,j,ijk->k', xi, eta, self.b)


@dataclass(frozen=True, eq=False)
class AssociatorTensor:
    a: np.ndarray
    basepoint: Point
    method: str

    def __call__(self, direction, xi, eta):
        return np.einsum('d,i,j,dijk->k', direction, xi, eta, self.a)


@dataclass(frozen=True)
class LtsReport:
    skew: float
    cyclic: float
    derivation: float
    method: str

    @property
    def worst(self):
        return max(self.skew, self.cyclic, self.derivation)


###############################################################################
# Brackets
###############################################################################


def ambient_commutator(manifold, y, xi, eta, h):
    """[rho(xi), rho(eta)] at ambient y by central differences of the extended frame."""
    F = manifold.extended_frame
    X = F(y) @ xi
    Y = F(y) @ eta
    dY = (F(y + h * X) @ eta - F(y - h * X) @ eta) / (2 * h)
    dX = (F(y + h * Y) @ xi - F(y - h * Y) @ xi) / (2 * h)
    return dY - dX


def _closed_commutator(manifold, y, xi, eta):
    n = manifold.dim
    v = np.zeros(manifold.descriptor.ambient_dim)
    for i in range(n):
        for j in range(i + 1, n):
            w = xi[i] * eta[j] - xi[j] * eta[i]
            if w:
                v += w * manifold.frame_bracket(i, j, y)
    return v


def bracket(manifold, s, xi, eta, tol=None, method='auto'):
    tol = tol or Tolerances()
    n = manifold.dim
    xi = algebra_element(xi, n)
    eta = algebra_element(eta, n)
    fm = frame(manifold, s, tol)
    method = _resolve(method, manifold.closed_brackets, 'bracket')
    if method == 'closed':
        v = _closed_commutator(manifold, s.ambient, xi, eta)
    else:
        v = ambient_commutator(manifold, np.array(s.ambient), xi, eta, tol.fd_step_1)
    off = tangent_residual(manifold.descriptor.blocks, s.ambient, v)
    if off > BRACKET_TANGENCY_TOL:
        raise OffManifoldError('commutator on %s is not tangent at %r (residual %.3e)' % (manifold.id, s, off))
    return -fm.coefficients(v)


def bracket_tensor(manifold, s, tol=None, method='auto'):
    n = manifold.dim
    b = np.zeros((n, n, n))
    resolved = _resolve(method, manifold.closed_brackets, 'bracket')
    for i in range(n):
        for j in range(i + 1, n):
            b[i, j] = bracket(manifold, s, basis(n, i), basis(n, j), tol, resolved)
            b[j, i] = -b[i, j]
    return BracketTensor(b, s, resolved)


def ad_matrix(manifold, s, xi, tol=None, method='auto'):
    """Matrix of eta -> b(xi, eta)."""
    n = manifold.dim
    return np.column_stack([bracket(manifold, s, xi, basis(n, j), tol, method) for j in range(n)])


def bracket_via_commutator(manifold, s, xi, eta, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """Mixed second derivative of (t1 xi) o_s (t2 eta) - (t2 eta) o_s (t1 xi) at 0."""
    tol = tol or Tolerances()
    xi = algebra_element(xi, manifold.dim)
    eta = algebra_element(eta, manifold.dim)
    h = tol.fd_step_2

    def g(a, c):
        return (local_product(manifold, a * xi, c * eta, s, tol, trust_radius)
                - local_product(manifold, c * eta, a * xi, s, tol, trust_radius))

    return (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4 * h * h)


def maurer_cartan(manifold, s, v, tol=None):
    """theta_s(v) = rho_s^{-1}(v) for a tangent vector v at s."""
    tol = tol or Tolerances()
    v = np.asarray(v, dtype=float)
    fm = frame(manifold, s, tol)
    off = tangent_residual(manifold.descriptor.blocks, s.ambient, v)
    if off > tol.check_tol_analytic:
        raise OffManifoldError('vector is not tangent to %s at %r (residual %.3e)' % (manifold.id, s, off))
    return fm.coefficients(v)


def structure_equation_residual(manifold, s, xi, eta, tol=None):
    """d theta(X, Y) - b(theta X, theta Y) for X = rho(xi), Y = rho(eta), as an algebra element.

    d theta(X, Y) = X theta(Y) - Y theta(X) - theta([X, Y]), with the
    directional derivatives taken along flows and [X, Y] by ambient differences.
    """
    tol = tol or Tolerances()
    xi = algebra_element(xi, manifold.dim)
    eta = algebra_element(eta, manifold.dim)
    h = tol.fd_step_2

    def theta_of_field(p, coeffs):
        return maurer_cartan(manifold, p, manifold.frame_matrix(p.ambient) @ coeffs, tol)

    def derivative(direction, coeffs):
        ahead = flow(manifold, direction, s, h, tol).endpoint
        behind = flow(manifold, direction, s, -h, tol).endpoint
        return (theta_of_field(ahead, coeffs) - theta_of_field(behind, coeffs)) / (2 * h)

    commutator = ambient_commutator(manifold, np.array(s.ambient), xi, eta, tol.fd_step_1)
    d_theta = derivative(xi, eta) - derivative(eta, xi) - maurer_cartan(manifold, s, commutator, tol)
    return d_theta - bracket(manifold, s, xi, eta, tol)


###############################################################################
# Associators
###############################################################################


def skew_associator(manifold, s, direction, xi, eta, tol=None, method='auto'):
    """a_s(direction; xi, eta): derivative of b(xi, eta) along rho(direction)."""
    tol = tol or Tolerances()
    n = manifold.dim
    direction = algebra_element(direction, n)
    xi = algebra_element(xi, n)
    eta = algebra_element(eta, n)
    check_point(manifold, s, tol)
    method = _resolve(method, manifold.closed_associator, 'associator')
    if method == 'closed':
        return np.asarray(manifold.associator_closed(s.ambient, direction, xi, eta), dtype=float)
    if not np.any(direction):
        return np.zeros(n)
    h = tol.fd_step_2
    ahead = flow(manifold, direction, s, h, tol).endpoint
    behind = flow(manifold, direction, s, -h, tol).endpoint
    return (bracket(manifold, ahead, xi, eta, tol) - bracket(manifold, behind, xi, eta, tol)) / (2 * h)


def associator_tensor(manifold, s, tol=None, method='auto'):
    tol = tol or Tolerances()
    n = manifold.dim
    method = _resolve(method, manifold.closed_associator, 'associator')
    a = np.zeros((n, n, n, n))
    if method == 'closed':
        for d in range(n):
            for i in range(n):
                for j in range(i + 1, n):
                    a[d, i, j] = manifold.associator_closed(s.ambient, basis(n, d), basis(n, i), basis(n, j))
                    a[d, j, i] = -a[d, i, j]
        return AssociatorTensor(a, s, method)
    h = tol.fd_step_2
    for d in range(n):
        ahead = flow(manifold, basis(n, d), s, h, tol).endpoint
        behind = flow(manifold, basis(n, d), s, -h, tol).endpoint
        a[d] = (bracket_tensor(manifold, ahead, tol).b - bracket_tensor(manifold, behind, tol).b) / (2 * h)
    return AssociatorTensor(a, s, method)


def associator_bracket(manifold, s, xi, eta, gamma, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """[xi, eta, gamma]_s: mixed third derivative of the loop associator at 0.

    The associator is (t1 xi) o ((t2 eta) o (t3 gamma)) - ((t1 xi) o (t2 eta)) o (t3 gamma).
    Central differences with steps fd_step_3 and fd_step_3 / 2 are combined by
    Richardson extrapolation.
    """
    tol = tol or Tolerances()
    n = manifold.dim
    xi = algebra_element(xi, n)
    eta = algebra_element(eta, n)
    gamma = algebra_element(gamma, n)

    def mul(left, right):
        return local_product(manifold, left, right, s, tol, trust_radius)

    def assoc(t1, t2, t3):
        x, y, z = t1 * xi, t2 * eta, t3 * gamma
        return mul(x, mul(y, z)) - mul(mul(x, y), z)

    def third(h):
        total = np.zeros(n)
        for s1 in (1, -1):
            for s2 in (1, -1):
                for s3 in (1, -1):
                    total += s1 * s2 * s3 * assoc(s1 * h, s2 * h, s3 * h)
        return total / (8 * h ** 3)

    h = tol.fd_step_3
    return (4 * third(h / 2) - third(h)) / 3


###############################################################################
# Identities
###############################################################################


def _cyclic_bracket(bt, xi, eta, gamma):
    return bt(xi, bt(eta, gamma)) + bt(eta, bt(gamma, xi)) + bt(gamma, bt(xi, eta))


def jacobi_residual(manifold, s, xi, eta, gamma, tol=None, method='auto'):
    """Cyclic sum b(xi, b(eta, gamma)) + b(eta, b(gamma, xi)) + b(gamma, b(xi, eta))."""
    n = manifold.dim
    bt = bracket_tensor(manifold, s, tol, method)
    return _cyclic_bracket(bt, algebra_element(xi, n), algebra_element(eta, n), algebra_element(gamma, n))


def generalized_jacobi_residual(manifold, s, xi, eta, gamma, tol=None, method='auto'):
    """Cyclic bracket sum minus the cyclic sum of a(xi; eta, gamma)."""
    cyclic_a = (skew_associator(manifold, s, xi, eta, gamma, tol, method)
                + skew_associator(manifold, s, eta, gamma, xi, tol, method)
                + skew_associator(manifold, s, gamma, xi, eta, tol, method))
    return jacobi_residual(manifold, s, xi, eta, gamma, tol) - cyclic_a


def lts_residuals(manifold, s, tol=None, method='auto'):
    """Lie triple system axioms of the triple [u, v, w] = a(w; u, v).

    skew: [u, v, w] + [v, u, w]; cyclic: [u, v, w] + [v, w, u] + [w, u, v];
    derivation: every D = [p, q, .] is a derivation of the triple.
    """
    at = associator_tensor(manifold, s, tol, method)
    t = at.a.transpose(1, 2, 0, 3)
    skew = np.abs(t + t.transpose(1, 0, 2, 3)).max()
    cyclic = np.abs(t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)).max()
    lhs = np.einsum('uvgm,pqmo->uvgpqo', t, t)
    rhs = (np.einsum('pqum,mvgo->uvgpqo', t, t)
           + np.einsum('pqvm,umgo->uvgpqo', t, t)
           + np.einsum('pqgm,uvmo->uvgpqo', t, t))
    derivation = np.abs(lhs - rhs).max()
    return LtsReport(float(skew), float(cyclic), float(derivation), at.method)


def semidirect_homomorphism_residual(manifold, s, xi, eta, tol=None):
    """|F(b(xi, eta)) - [F xi, F eta]| for F(xi) = (xi - <xi, x> x, <xi, x>) on S^m x S^1.

    The target bracket is that of the semidirect sum R^{m+1} + R with
    [(u, l), (v, m)] = (m u - l v, 0).
    """
    if not isinstance(manifold, SphereCircle):
        raise ValueError('semidirect homomorphism is defined on S^m x S^1 only, not %s' % manifold.id)
    x = manifold.sphere_part(s.ambient)

    def F(v):
        c = v @ x
        return v - c * x, c

    xi = algebra_element(xi, manifold.dim)
    eta = algebra_element(eta, manifold.dim)
    u, lam = F(xi)
    v, mu = F(eta)
    w, nu = F(bracket(manifold, s, xi, eta, tol))
    return float(np.linalg.norm(np.append(w - (mu * u - lam * v), nu)))


def constant_bracket_probe(manifold, points, tol=None, method='auto'):
    """Largest deviation of the bracket tensor across points from its value at the first point."""
    points = list(points)
    reference = bracket_tensor(manifold, points[0], tol, method).b
    return max((float(np.abs(bracket_tensor(manifold, p, tol, method).b - reference).max()) for p in points[1:]),
               default=0.0)
