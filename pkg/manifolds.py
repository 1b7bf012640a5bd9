"""
Catalog of parallelized manifolds.

Every manifold lives in an ambient R^N as a product of unit spheres, unit
quaternions and circles (see core.Block). A manifold provides its frame as an
N x n matrix whose columns are the frame fields f_1..f_n evaluated at an ambient
point; columns are indexed from 0 throughout the library.
"""

import abc
import logging
import re
from dataclasses import dataclass

import numpy as np
import quaternion  # noqa: F401  (registers np.quaternion)

from core import (RANK_TOL, CatalogError, DimensionError, OffManifoldError, Point, RankDeficiencyError,
                  Tolerances, algebra_element, check_point, make_layout, normalize_point, point_distance,
                  project_blocks, solve_frame, tangent_residual)

logger = logging.getLogger(__name__)

# tangency of frame columns is asserted to this level
FRAME_TANGENCY_TOL = 1e-8


@dataclass(frozen=True)
class ManifoldDescriptor:
    id: str
    intrinsic_dim: int
    ambient_dim: int
    blocks: tuple
    kind: str


class ParallelizedManifold(abc.ABC):
    """A manifold with a global frame given in ambient coordinates.

    Subclasses implement frame_matrix. The optional closed forms return None
    when unavailable; the class flags say which of them are implemented.
    """

    closed_brackets = False
    closed_flow = False
    closed_associator = False

    def __init__(self, descriptor):
        size = sum(b.size for b in descriptor.blocks)
        if size != descriptor.ambient_dim:
            raise DimensionError('%s: blocks cover %d coordinates, ambient dimension is %d'
                                 % (descriptor.id, size, descriptor.ambient_dim))
        if descriptor.intrinsic_dim < 1:
            raise DimensionError('%s: intrinsic dimension must be positive' % descriptor.id)
        self.descriptor = descriptor

    def __repr__(self):
        return '<%s %s>' % (type(self).__name__, self.descriptor.id)

    @property
    def id(self):
        return self.descriptor.id

    @property
    def dim(self):
        return self.descriptor.intrinsic_dim

    @abc.abstractmethod
    def frame_matrix(self, y):
        """N x n matrix of frame fields at the ambient point y (assumed on the manifold)."""

    def extended_frame(self, y):
        """Frame extended off the manifold by radial projection of the spherical blocks."""
        return self.frame_matrix(project_blocks(self.descriptor.blocks, y))

    def frame_bracket(self, i, j, y):
        """Ambient vector of [f_i, f_j] at y, or None."""
        return None

    def flow_closed(self, xi, y, t):
        """Unnormalized ambient endpoint of the flow of rho(xi) for time t, or None."""
        return None

    def associator_closed(self, y, direction, xi, eta):
        """Coefficients of the derivative of b(xi, eta) along rho(direction), or None."""
        return None

    def project(self, raw):
        return normalize_point(self, raw)

    def distance(self, p, q):
        return point_distance(self, p, q)

    def basepoint(self):
        raw = np.zeros(self.descriptor.ambient_dim)
        for b in self.descriptor.blocks:
            if b.spherical:
                raw[b.offset] = 1.0
        return self.project(raw)

    def random_point(self, rng):
        raw = np.zeros(self.descriptor.ambient_dim)
        for b in self.descriptor.blocks:
            if b.spherical:
                raw[b.slice] = rng.standard_normal(b.size)
            else:
                raw[b.offset] = rng.uniform(0.0, 2.0 * np.pi)
        return self.project(raw)

    def random_element(self, rng, scale=1.0):
        return scale * rng.uniform(-1.0, 1.0, self.dim)


###############################################################################
# Frames
###############################################################################


@dataclass(frozen=True, eq=False)
class FrameMap:
    """The isomorphism rho_s from the model algebra onto T_s M."""

    matrix: np.ndarray
    basepoint: Point

    def apply(self, xi):
        return self.matrix @ algebra_element(xi, self.matrix.shape[1])

    def coefficients(self, v):
        return solve_frame(self.matrix, np.asarray(v, dtype=float))


def frame(manifold, s, tol=None):
    check_point(manifold, s, tol)
    F = manifold.frame_matrix(s.ambient)
    d = manifold.descriptor
    if F.shape != (d.ambient_dim, d.intrinsic_dim):
        raise DimensionError('%s frame has shape %s' % (d.id, F.shape))
    sv = np.linalg.svd(F, compute_uv=False)
    if sv[-1] <= RANK_TOL:
        raise RankDeficiencyError('%s frame degenerate at %r (smallest singular value %.3e)' % (d.id, s, sv[-1]))
    worst = max(tangent_residual(d.blocks, s.ambient, F[:, k]) for k in range(F.shape[1]))
    if worst > FRAME_TANGENCY_TOL:
        raise OffManifoldError('%s frame not tangent at %r (residual %.3e)' % (d.id, s, worst))
    return FrameMap(F, s)


def frame_bracket_closed(manifold, i, j, s):
    n = manifold.dim
    if not (0 <= i < n and 0 <= j < n):
        raise DimensionError('frame indices (%d, %d) out of range for dimension %d' % (i, j, n))
    if not manifold.closed_brackets:
        return None
    return manifold.frame_bracket(i, j, s.ambient)


def closed_form_flow(manifold, xi, s, t):
    if not manifold.closed_flow:
        return None
    xi = algebra_element(xi, manifold.dim)
    return manifold.project(manifold.flow_closed(xi, s.ambient, float(t)))


def structure_functions(manifold, s):
    """c[i, j] = coefficients of [f_i, f_j] in the frame at s (closed-form brackets only)."""
    if not manifold.closed_brackets:
        return None
    F = frame(manifold, s).matrix
    n = manifold.dim
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            c[i, j] = solve_frame(F, manifold.frame_bracket(i, j, s.ambient))
            c[j, i] = -c[i, j]
    return c


###############################################################################
# Catalog entries
###############################################################################


class Torus(ParallelizedManifold):
    """Flat torus T^k with coordinate frame; brackets and associators vanish."""

    closed_brackets = True
    closed_flow = True
    closed_associator = True

    def __init__(self, k):
        if k < 1:
            raise CatalogError('torus dimension must be positive, got %d' % k)
        super().__init__(ManifoldDescriptor('torus%d' % k, k, k, make_layout([('circle', 1)] * k), 'torus'))

    def frame_matrix(self, y):
        return np.eye(self.dim)

    def frame_bracket(self, i, j, y):
        return np.zeros(self.dim)

    def flow_closed(self, xi, y, t):
        return np.asarray(y, dtype=float) + t * xi

    def associator_closed(self, y, direction, xi, eta):
        return np.zeros(self.dim)


def _quat(v):
    return np.quaternion(0.0, *v)


class UnitQuaternions(ParallelizedManifold):
    """S^3 as unit quaternions (w, x, y, z) with the right-invariant frame f_i(q) = e_i q."""

    closed_brackets = True
    closed_flow = True
    closed_associator = True

    _units = (np.quaternion(0, 1, 0, 0), np.quaternion(0, 0, 1, 0), np.quaternion(0, 0, 0, 1))

    def __init__(self):
        super().__init__(ManifoldDescriptor('s3', 3, 4, make_layout([('group', 4)]), 'group'))

    def frame_matrix(self, y):
        q = np.quaternion(*y)
        return np.column_stack([quaternion.as_float_array(e * q) for e in self._units])

    def frame_bracket(self, i, j, y):
        q = np.quaternion(*y)
        a, b = self._units[i], self._units[j]
        return quaternion.as_float_array((b * a - a * b) * q)

    def flow_closed(self, xi, y, t):
        q = np.quaternion(*y)
        return quaternion.as_float_array(np.exp(_quat(t * np.asarray(xi))) * q)

    def associator_closed(self, y, direction, xi, eta):
        return np.zeros(3)


class SphereCircle(ParallelizedManifold):
    """S^m x S^1 with frame f_i = (e_i - x_i x, x_i) in coordinates (x, phi)."""

    closed_brackets = True
    closed_flow = True
    closed_associator = True

    def __init__(self, m):
        if m < 1:
            raise CatalogError('sphere dimension must be positive, got %d' % m)
        self.m = m
        blocks = make_layout([('sphere', m + 1), ('circle', 1)])
        super().__init__(ManifoldDescriptor('sphere_circle%d' % m, m + 1, m + 2, blocks, 'sphere_circle'))

    def sphere_part(self, y):
        return np.asarray(y, dtype=float)[:self.m + 1]

    def frame_matrix(self, y):
        x = self.sphere_part(y)
        F = np.empty((self.m + 2, self.m + 1))
        F[:-1] = np.eye(self.m + 1) - np.outer(x, x)
        F[-1] = x
        return F

    def frame_bracket(self, i, j, y):
        x = self.sphere_part(y)
        F = self.frame_matrix(y)
        return x[i] * F[:, j] - x[j] * F[:, i]

    def flow_closed(self, xi, y, t):
        x0 = self.sphere_part(y)
        phi0 = float(y[-1])
        speed = float(np.linalg.norm(xi))
        if speed == 0.0 or t == 0.0:
            return np.array(y, dtype=float)
        u = xi / speed
        tau = speed * t
        c = float(np.clip(u @ x0, -1.0, 1.0))
        w = x0 - c * u
        # cosh(tau) + c sinh(tau) = (e^log_plus + e^log_minus) / 2; every term below is scaled by it
        with np.errstate(divide='ignore'):
            log_plus = np.log1p(c) + tau
            log_minus = np.log1p(-c) - tau
        log_denom = np.logaddexp(log_plus, log_minus)
        x = u * (np.exp(log_plus - log_denom) - np.exp(log_minus - log_denom))
        rw = float(np.linalg.norm(w))
        if rw > 0.0:
            x = x + (w / rw) * np.exp(np.log(2.0 * rw) - log_denom)
        phi = phi0 + log_denom - np.log(2.0)
        return np.append(x, phi)

    def associator_closed(self, y, direction, xi, eta):
        x = self.sphere_part(y)
        d = np.asarray(direction, dtype=float)
        xd = x @ d
        return xi * (d @ eta - xd * (x @ eta)) - eta * (d @ xi - xd * (x @ xi))


class SphereProduct(ParallelizedManifold):
    """S^m x N for a parallelized N whose first frame field T plays the role of the circle.

    Frame: f_i = (e_i - x_i x) + x_i T for i <= m, followed by the remaining frame
    fields of N. With N = S^n x S^1 this is orthonormal.
    """

    def __init__(self, m, base, key=None):
        if m < 1:
            raise CatalogError('sphere dimension must be positive, got %d' % m)
        if base.dim < 1:
            raise CatalogError('base manifold must have positive dimension')
        self.m = m
        self.base = base
        self.closed_brackets = base.closed_brackets
        factors = [('sphere', m + 1)] + [(b.kind, b.size) for b in base.descriptor.blocks]
        key = key or 'sphere%d_x_%s' % (m, base.id)
        super().__init__(ManifoldDescriptor(key, m + base.dim, m + 1 + base.descriptor.ambient_dim,
                                            make_layout(factors), 'composite'))

    def split(self, y):
        y = np.asarray(y, dtype=float)
        return y[:self.m + 1], y[self.m + 1:]

    def _lift(self, v):
        # embed a vector of the base ambient space
        out = np.zeros(self.descriptor.ambient_dim)
        out[self.m + 1:] = v
        return out

    def frame_matrix(self, y):
        x, z = self.split(y)
        G = self.base.frame_matrix(z)
        k = self.m + 1
        F = np.zeros((self.descriptor.ambient_dim, self.dim))
        F[:k, :k] = np.eye(k) - np.outer(x, x)
        F[k:, :k] = np.outer(G[:, 0], x)
        F[k:, k:] = G[:, 1:]
        return F

    def frame_bracket(self, i, j, y):
        if not self.closed_brackets:
            return None
        x, z = self.split(y)
        k = self.m + 1
        if i < k and j < k:
            F = self.frame_matrix(y)
            return x[i] * F[:, j] - x[j] * F[:, i]
        if i < k:
            return x[i] * self._lift(self.base.frame_bracket(0, j - self.m, z))
        if j < k:
            return -x[j] * self._lift(self.base.frame_bracket(0, i - self.m, z))
        return self._lift(self.base.frame_bracket(i - self.m, j - self.m, z))


###############################################################################
# Catalog
###############################################################################


DEFAULT_KEYS = ('torus2', 'torus3', 's3', 'sphere_circle2', 'sphere_circle4', 'sphere_sphere_circle2_2')

_PATTERNS = (
    (re.compile(r'torus(\d+)$'), lambda g: Torus(int(g[0]))),
    (re.compile(r's3$'), lambda g: UnitQuaternions()),
    (re.compile(r'sphere_circle(\d+)$'), lambda g: SphereCircle(int(g[0]))),
    (re.compile(r'sphere_sphere_circle(\d+)_(\d+)$'),
     lambda g: SphereProduct(int(g[0]), SphereCircle(int(g[1])), key='sphere_sphere_circle%s_%s' % g)),
)

_registry = {}


def register(key, factory):
    """Add a user-defined manifold; factory() must return a ParallelizedManifold."""
    if key in _registry or any(p.match(key) for p, _ in _PATTERNS):
        raise CatalogError('manifold key %r already taken' % key)
    _registry[key] = factory


def unregister(key):
    _registry.pop(key, None)


def get(key):
    if key in _registry:
        manifold = _registry[key]()
        if not isinstance(manifold, ParallelizedManifold):
            raise CatalogError('factory of %r did not build a ParallelizedManifold' % key)
        return manifold
    for pattern, build in _PATTERNS:
        match = pattern.match(key)
        if match:
            return build(match.groups())
    raise CatalogError('unknown manifold %r' % key)


def catalog():
    return [get(key).descriptor for key in DEFAULT_KEYS + tuple(sorted(_registry))]


def point_from_coords(manifold, coords, tol=None):
    """Normalize user-given coordinates and make sure the result is a valid point."""
    return check_point(manifold, manifold.project(coords), tol or Tolerances())
