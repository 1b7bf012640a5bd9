"""
Shared value types for parallelized manifolds: tolerances, algebra elements,
inner products, points and the ambient block layout every manifold is built from.
"""

import logging
import math
from dataclasses import dataclass, fields

import numpy as np
import scipy.linalg

__version__ = "0.1.0"

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# frame columns with a smaller singular value are treated as rank deficient
RANK_TOL = 1e-9


###############################################################################
# Errors
###############################################################################


class ParallaxError(Exception):
    """Base class of every error raised by the library."""


class DimensionError(ParallaxError, ValueError):
    pass


class ConfigError(ParallaxError, ValueError):
    pass


class OffManifoldError(ParallaxError, ValueError):
    pass


class RankDeficiencyError(ParallaxError, ArithmeticError):
    pass


class IntegrationError(ParallaxError, RuntimeError):
    pass


class ConvergenceError(ParallaxError, RuntimeError):
    pass


class TrustRegionError(ConvergenceError):
    pass


class StepBudgetError(ParallaxError, RuntimeError):
    pass


class CatalogError(ParallaxError, KeyError):
    pass


class MorphismError(ParallaxError, ValueError):
    pass


class NonFiniteError(ParallaxError, ValueError):
    pass


###############################################################################
# Tolerances
###############################################################################


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances threaded through every operation.

    Parameters:
        point_tol          -- admissible constraint residual of a point
        newton_tol         -- ambient residual accepted by quotient solves
        newton_max_iter    -- iteration budget of quotient solves
        ode_rel_tol        -- relative tolerance of the embedded Runge-Kutta pair
        ode_abs_tol        -- absolute tolerance of the embedded Runge-Kutta pair
        fd_step_1          -- step of first-derivative central differences
        fd_step_2          -- step of second mixed differences
        fd_step_3          -- step of third mixed differences
        check_tol_analytic -- pass threshold of closed-form identities
        check_tol_fd2      -- pass threshold of checks built on fd_step_1/fd_step_2
        check_tol_fd3      -- pass threshold of checks built on fd_step_3
    """

    point_tol: float = 1e-10
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    fd_step_1: float = 1e-5
    fd_step_2: float = 1e-3
    fd_step_3: float = 5e-2
    check_tol_analytic: float = 1e-8
    check_tol_fd2: float = 1e-4
    check_tol_fd3: float = 1e-2

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError('tolerance %s must be strictly positive, got %r' % (f.name, value))
        if int(self.newton_max_iter) != self.newton_max_iter:
            raise ConfigError('newton_max_iter must be an integer, got %r' % self.newton_max_iter)
        for name in ('fd_step_1', 'fd_step_2', 'fd_step_3'):
            if getattr(self, name) >= 1:
                raise ConfigError('%s must be < 1' % name)

    @classmethod
    def from_config(cls, args):
        """Build from an attribute struct (see utils.parse_config) or a plain dict."""
        data = dict(args) if isinstance(args, dict) else dict(vars(args))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError('unknown tolerance keys: %s' % ', '.join(unknown))
        if 'newton_max_iter' in data:
            data['newton_max_iter'] = int(data['newton_max_iter'])
        return cls(**data)


###############################################################################
# Algebra elements and inner products
###############################################################################


def algebra_element(coeffs, n=None):
    """Validate coefficients of an element of the model algebra in the basis {e_i}."""
    xi = np.array(coeffs, dtype=float).reshape(-1)
    if n is not None and xi.shape[0] != n:
        raise DimensionError('algebra element has length %d, expected %d' % (xi.shape[0], n))
    if not np.all(np.isfinite(xi)):
        raise NonFiniteError('algebra element has non-finite entries')
    return xi


def basis(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class InnerProduct:
    gram: np.ndarray

    def __post_init__(self):
        gram = np.array(self.gram, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise DimensionError('gram matrix must be square, got shape %s' % (gram.shape,))
        if not np.array_equal(gram, gram.T):
            raise ConfigError('gram matrix is not symmetric')
        try:
            # succeeds iff every leading principal minor is positive
            scipy.linalg.cholesky(gram, lower=True)
        except np.linalg.LinAlgError:
            raise ConfigError('gram matrix is not positive definite')
        gram.setflags(write=False)
        object.__setattr__(self, 'gram', gram)

    @property
    def dim(self):
        return self.gram.shape[0]

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))


def inner(u, v, ip=None):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionError('inner product of vectors of length %d and %d' % (u.size, v.size))
    if ip is None:
        return float(u @ v)
    if ip.dim != u.size:
        raise DimensionError('inner product of dimension %d applied to length %d' % (ip.dim, u.size))
    return float(u @ ip.gram @ v)


###############################################################################
# Ambient layout
###############################################################################


@dataclass(frozen=True)
class Block:
    """A factor of a product manifold inside the ambient coordinates.

    kind is "sphere" (unit sphere in R^size), "group" (unit quaternions, size 4)
    or "circle" (one angle in radians).
    """

    kind: str
    offset: int
    size: int

    @property
    def slice(self):
        return slice(self.offset, self.offset + self.size)

    @property
    def spherical(self):
        return self.kind in ('sphere', 'group')


def make_layout(factors):
    """factors: iterable of (kind, size) pairs -> tuple of Blocks with offsets."""
    blocks = []
    offset = 0
    for kind, size in factors:
        if kind not in ('sphere', 'group', 'circle'):
            raise ConfigError('unknown block kind %r' % kind)
        if kind == 'circle' and size != 1:
            raise ConfigError('circle blocks hold a single angle')
        blocks.append(Block(kind, offset, size))
        offset += size
    return tuple(blocks)


def project_blocks(blocks, y):
    """Radial projection of every spherical block; angles are left unwrapped."""
    out = np.array(y, dtype=float)
    for b in blocks:
        if b.spherical:
            r = np.linalg.norm(out[b.slice])
            if r == 0.0:
                raise OffManifoldError('zero %s block at offset %d, projection undefined' % (b.kind, b.offset))
            out[b.slice] /= r
    return out


def constraint_residual(blocks, y):
    y = np.asarray(y, dtype=float)
    res = 0.0
    for b in blocks:
        if b.spherical:
            res = max(res, abs(float(y[b.slice] @ y[b.slice]) - 1.0))
    return res


def tangent_residual(blocks, y, v):
    """Norm of the constraint Jacobian applied to v at y."""
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    comps = [float(y[b.slice] @ v[b.slice]) for b in blocks if b.spherical]
    return float(np.linalg.norm(comps)) if comps else 0.0


def wrap_angle(phi):
    phi = math.fmod(float(phi), TWO_PI)
    if phi < 0:
        phi += TWO_PI
    if phi >= TWO_PI:
        phi = 0.0
    return phi


def ambient_difference(blocks, a, b):
    """a - b with circle blocks compared by minimal angular distance."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    for blk in blocks:
        if blk.kind == 'circle':
            k = blk.offset
            d[k] = math.remainder(d[k], TWO_PI)
    return d


###############################################################################
# Points
###############################################################################


@dataclass(frozen=True, eq=False)
class Point:
    ambient: np.ndarray
    manifold_id: str

    def __post_init__(self):
        a = np.array(self.ambient, dtype=float).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, 'ambient', a)

    def __repr__(self):
        return 'Point(%s, %s)' % (np.array2string(self.ambient, precision=6), self.manifold_id)


def _unit_block(x):
    r = np.linalg.norm(x)
    if r == 0.0:
        raise OffManifoldError('zero sphere block, projection undefined')
    # leave already-normalized blocks untouched so that normalization is idempotent
    if abs(r - 1.0) <= 16 * np.finfo(float).eps:
        return x
    return x / r


def normalize_point(manifold, raw):
    """Project raw ambient coordinates onto the manifold and reduce angles mod 2*pi."""
    d = manifold.descriptor
    raw = np.array(raw, dtype=float).reshape(-1)
    if raw.shape[0] != d.ambient_dim:
        raise DimensionError('%s expects %d ambient coordinates, got %d' % (d.id, d.ambient_dim, raw.shape[0]))
    if not np.all(np.isfinite(raw)):
        raise OffManifoldError('non-finite ambient coordinates')
    out = raw.copy()
    for b in d.blocks:
        if b.spherical:
            out[b.slice] = _unit_block(out[b.slice])
        else:
            out[b.offset] = wrap_angle(out[b.offset])
    return Point(out, d.id)


def check_point(manifold, s, tol=None):
    """Raise OffManifoldError when s does not belong to manifold within point_tol."""
    tol = tol or Tolerances()
    d = manifold.descriptor
    if s.manifold_id != d.id:
        raise OffManifoldError('point belongs to %s, not %s' % (s.manifold_id, d.id))
    if s.ambient.shape[0] != d.ambient_dim:
        raise DimensionError('point has %d ambient coordinates, %s needs %d'
                             % (s.ambient.shape[0], d.id, d.ambient_dim))
    res = constraint_residual(d.blocks, s.ambient)
    if res > tol.point_tol:
        raise OffManifoldError('point off %s: constraint residual %.3e > %.1e' % (d.id, res, tol.point_tol))
    return s


def point_distance(manifold, p, q):
    return float(np.linalg.norm(ambient_difference(manifold.descriptor.blocks, p.ambient, q.ambient)))


###############################################################################
# Frame linear algebra
###############################################################################


def solve_frame(matrix, v):
    """Least-squares coefficients of v in the columns of a frame matrix (rank-checked)."""
    coeffs, _, rank, sv = scipy.linalg.lstsq(matrix, v, lapack_driver='gelsd')
    if sv.size == 0 or sv[-1] <= RANK_TOL or rank < matrix.shape[1]:
        raise RankDeficiencyError('frame is rank deficient (smallest singular value %.3e)'
                                  % (sv[-1] if sv.size else 0.0))
    return coeffs
