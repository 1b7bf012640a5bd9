"""
Morphisms of parallelized manifolds: pairs (h, h') with h(xi . s) = (h' xi) . h(s),
their pseudoautomorphism and bracket identities, and embeddings of the
automorphism group into GL(n) x M.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import quaternion
import scipy.linalg

from algebra import bracket
from core import MorphismError, Point, Tolerances, algebra_element, check_point, point_distance
from flow import product
from loops import DEFAULT_TRUST_RADIUS, factorize, local_product, right_quotient
from manifolds import SphereCircle, SphereProduct, Torus, UnitQuaternions

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-10
MORPHISM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CandidatePair:
    h: Callable[[Point], Point]
    h_prime: np.ndarray
    label: str = ''
    params: dict = field(default_factory=dict)

    def __call__(self, p):
        return self.h(p)


@dataclass(frozen=True, eq=False)
class AutomorphismEmbedding:
    h_prime: np.ndarray
    image: Point


def morphism_residual(manifold, pair, samples, tol=None):
    """Largest distance between h(xi . s) and (h' xi) . h(s) over (xi, s) samples."""
    worst = 0.0
    for xi, s in samples:
        xi = algebra_element(xi, manifold.dim)
        lhs = pair.h(product(manifold, xi, s, tol))
        rhs = product(manifold, pair.h_prime @ xi, pair.h(s), tol)
        worst = max(worst, point_distance(manifold, lhs, rhs))
    return worst


def pseudoautomorphism_residual(manifold, h_prime, companion, s, samples, tol=None,
                                trust_radius=DEFAULT_TRUST_RADIUS):
    """Largest |h'(eta o xi) o A - (h' eta) o ((h' xi) o A)| over (eta, xi) samples, A the companion."""
    def mul(left, right):
        return local_product(manifold, left, right, s, tol, trust_radius)

    worst = 0.0
    for eta, xi in samples:
        lhs = mul(h_prime @ mul(eta, xi), companion)
        rhs = mul(h_prime @ eta, mul(h_prime @ xi, companion))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def bracket_equivariance_residual(manifold, pair, s, xi, eta, tol=None):
    """|h' b_s(xi, eta) - b_{h(s)}(h' xi, h' eta)|."""
    lhs = pair.h_prime @ bracket(manifold, s, xi, eta, tol)
    rhs = bracket(manifold, pair.h(s), pair.h_prime @ xi, pair.h_prime @ eta, tol)
    return float(np.linalg.norm(lhs - rhs))


def compose(a, b):
    """The pair (a.h o b.h, a.h' b.h')."""
    params = {}
    if 'R' in a.params and 'R' in b.params:
        params = {'R': a.params['R'] @ b.params['R'], 'c': a.params.get('c', 0.0) + b.params.get('c', 0.0)}
    return CandidatePair(lambda p: a.h(b.h(p)), a.h_prime @ b.h_prime, '%s*%s' % (a.label, b.label), params)


###############################################################################
# Catalog automorphisms
###############################################################################


def induced_sphere_pair(manifold, M, c=0.0):
    """h(x, phi) = (Mx / |Mx|, phi + c) with h' = M on S^m x S^1; a morphism only for M in SO(m+1)."""
    if not isinstance(manifold, SphereCircle):
        raise MorphismError('sphere maps act on S^m x S^1, not %s' % manifold.id)
    M = np.array(M, dtype=float)
    if M.shape != (manifold.m + 1, manifold.m + 1):
        raise MorphismError('matrix of shape %s does not act on S^%d' % (M.shape, manifold.m))

    def h(p):
        x = manifold.sphere_part(p.ambient)
        return manifold.project(np.append(M @ x, p.ambient[-1] + c))
    return CandidatePair(h, M, 'sphere', {'R': M, 'c': float(c)})


def _check_rotation(R):
    R = np.array(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise MorphismError('rotation must be square, got shape %s' % (R.shape,))
    err = np.abs(R.T @ R - np.eye(R.shape[0])).max()
    if err > ORTHOGONALITY_TOL:
        raise MorphismError('matrix is not orthogonal (|R^T R - I| = %.3e)' % err)
    if np.linalg.det(R) <= 0:
        raise MorphismError('matrix reverses orientation; only det = +1 is supported')
    return R


def sphere_automorphism(manifold, R, c=0.0):
    """The automorphism (R, c) in SO(m+1) x U(1) of S^m x S^1."""
    return induced_sphere_pair(manifold, _check_rotation(R), c)


def sphere_rotation_pair(manifold, R):
    """Rotation of the first sphere factor of S^m x N, acting trivially on N."""
    if isinstance(manifold, SphereCircle):
        return sphere_automorphism(manifold, R)
    if not isinstance(manifold, SphereProduct):
        raise MorphismError('no sphere factor to rotate on %s' % manifold.id)
    R = _check_rotation(R)
    k = manifold.m + 1
    if R.shape != (k, k):
        raise MorphismError('rotation of shape %s does not act on S^%d' % (R.shape, manifold.m))

    def h(p):
        y = np.array(p.ambient)
        y[:k] = R @ y[:k]
        return manifold.project(y)
    return CandidatePair(h, scipy.linalg.block_diag(R, np.eye(manifold.dim - k)), 'rotation', {'R': R})


def torus_translation_pair(manifold, c):
    if not isinstance(manifold, Torus):
        raise MorphismError('translations act on tori, not %s' % manifold.id)
    c = algebra_element(c, manifold.dim)
    return CandidatePair(lambda p: manifold.project(p.ambient + c), np.eye(manifold.dim), 'translation')


def quaternion_conjugation_pair(manifold, g):
    """q -> g q g^-1 on S^3 with h' the rotation xi -> g xi g^-1."""
    if not isinstance(manifold, UnitQuaternions):
        raise MorphismError('conjugation acts on s3, not %s' % manifold.id)
    g = np.quaternion(*g).normalized()
    gi = g.inverse()
    R = quaternion.as_rotation_matrix(g)

    def h(p):
        q = g * np.quaternion(*p.ambient) * gi
        return manifold.project(quaternion.as_float_array(q))
    return CandidatePair(h, R, 'conjugation')


###############################################################################
# Automorphism embedding
###############################################################################


def _default_samples(manifold, count=4, seed=0):
    rng = np.random.default_rng(seed)
    return [(manifold.random_element(rng, 0.5), manifold.random_point(rng)) for _ in range(count)]


def automorphism_embedding(manifold, pair, s, tol=None, samples=None):
    """(h', h(s)) for a pair that passes the morphism check, else MorphismError."""
    tol = tol or Tolerances()
    check_point(manifold, s, tol)
    residual = morphism_residual(manifold, pair, samples or _default_samples(manifold), tol)
    if residual > MORPHISM_TOL:
        raise MorphismError('%s is not a morphism of %s (residual %.3e)' % (pair.label or 'pair', manifold.id, residual))
    return AutomorphismEmbedding(np.array(pair.h_prime, dtype=float), pair.h(s))


def embedding_distance(manifold, a, b):
    return max(float(np.abs(a.h_prime - b.h_prime).max()), point_distance(manifold, a.image, b.image))


def probe_agreement(manifold, a, b, points):
    """Largest distance between the images of two pairs over probe points."""
    return max((point_distance(manifold, a.h(p), b.h(p)) for p in points), default=0.0)


def reconstruct_image(manifold, embedding, s, p, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """h(p) rebuilt from (h', h(s)) alone by factorizing p over s."""
    q = embedding.image
    for xi in reversed(factorize(manifold, p, s, tol, trust_radius)):
        q = product(manifold, embedding.h_prime @ xi, q, tol)
    return q


def stabilizer_companion(manifold, pair, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """A = h(s) / s."""
    return right_quotient(manifold, pair.h(s), s, tol, trust_radius).xi
