"""
Local loop structure induced at a basepoint s: right quotients p / s, the
product eta o_s xi = (eta . (xi . s)) / s, its two quotients, powers and
factorization of points into chains of products.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from core import (ConvergenceError, StepBudgetError, Tolerances, TrustRegionError, algebra_element,
                  ambient_difference, basis, check_point, point_distance)
from flow import product
from manifolds import frame

logger = logging.getLogger(__name__)

DEFAULT_TRUST_RADIUS = 0.5

# the Jacobian estimate is rebuilt by finite differences every this many iterations
JACOBIAN_REFRESH = 5
MAX_HALVINGS = 20
ANTIPODAL_COS = -0.9


@dataclass(frozen=True, eq=False)
class QuotientSolve:
    xi: np.ndarray
    iterations: int
    residual: float


def right_quotient(manifold, p, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS, seed=None):
    """p / s: the xi continuously connected to 0 with xi . s = p.

    Quasi-Newton iteration on xi -> xi . s with Broyden rank-one updates,
    periodic finite-difference Jacobians and a backtracking line search on
    the ambient residual. Raises ConvergenceError when the iteration fails and
    TrustRegionError when the root lies outside trust_radius.
    """
    tol = tol or Tolerances()
    check_point(manifold, p, tol)
    check_point(manifold, s, tol)
    blocks = manifold.descriptor.blocks
    n = manifold.dim

    def residual(xi):
        return ambient_difference(blocks, product(manifold, xi, s, tol).ambient, p.ambient)

    def fd_jacobian(xi, r):
        h = tol.fd_step_1
        return np.column_stack([(residual(xi + h * basis(n, k)) - r) / h for k in range(n)])

    if seed is None:
        xi = np.zeros(n)
        r = residual(xi)
        J = frame(manifold, s, tol).matrix
    else:
        xi = algebra_element(seed, n)
        r = residual(xi)
        J = fd_jacobian(xi, r)
    norm_r = float(np.linalg.norm(r))

    iterations = 0
    fresh = seed is not None
    while norm_r > tol.newton_tol:
        if iterations >= tol.newton_max_iter:
            raise ConvergenceError('right quotient on %s: no convergence in %d iterations (residual %.3e)'
                                   % (manifold.id, iterations, norm_r))
        iterations += 1
        step = scipy.linalg.lstsq(J, -r)[0]
        alpha = 1.0
        trial = r_trial = None
        for _ in range(MAX_HALVINGS):
            candidate = xi + alpha * step
            if np.linalg.norm(candidate) <= 2 * trust_radius:
                r_candidate = residual(candidate)
                if np.linalg.norm(r_candidate) < norm_r:
                    trial, r_trial = candidate, r_candidate
                    break
            alpha /= 2
        if trial is None:
            if fresh:
                raise ConvergenceError('right quotient on %s: line search failed (residual %.3e)'
                                       % (manifold.id, norm_r))
            J = fd_jacobian(xi, r)
            fresh = True
            continue

        dx = trial - xi
        dr = r_trial - r
        xi, r = trial, r_trial
        norm_r = float(np.linalg.norm(r))
        if iterations % JACOBIAN_REFRESH == 0:
            J = fd_jacobian(xi, r)
            fresh = True
        else:
            J = J + np.outer(dr - J @ dx, dx) / (dx @ dx)
            fresh = False

    size = float(np.linalg.norm(xi))
    if size > trust_radius:
        raise TrustRegionError('right quotient on %s has |xi| = %.4g outside trust radius %.4g'
                               % (manifold.id, size, trust_radius))
    return QuotientSolve(xi, iterations, norm_r)


def local_product(manifold, eta, xi, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """eta o_s xi = (eta . (xi . s)) / s."""
    eta = algebra_element(eta, manifold.dim)
    xi = algebra_element(xi, manifold.dim)
    p = product(manifold, eta, product(manifold, xi, s, tol), tol)
    return right_quotient(manifold, p, s, tol, trust_radius).xi


def right_quotient_s(manifold, xi, eta, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """xi /_s eta: the zeta with zeta o_s eta = xi."""
    p = product(manifold, xi, s, tol)
    q = product(manifold, eta, s, tol)
    return right_quotient(manifold, p, q, tol, trust_radius).xi


def left_quotient_s(manifold, xi, eta, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """xi \\_s eta: the zeta with xi o_s zeta = eta."""
    xi = algebra_element(xi, manifold.dim)
    q = product(manifold, -xi, product(manifold, eta, s, tol), tol)
    return right_quotient(manifold, q, s, tol, trust_radius).xi


def power(manifold, xi, k, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """k-th power of xi in the loop at s, bracketed from the right: xi o (xi o (... o xi))."""
    xi = algebra_element(xi, manifold.dim)
    k = int(k)
    if k == 0:
        return np.zeros(manifold.dim)
    if k < 0:
        xi, k = -xi, -k
    acc = xi
    for _ in range(k - 1):
        acc = local_product(manifold, xi, acc, s, tol, trust_radius)
    return acc


def point_product(manifold, p, q, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS):
    """Loop product on points with identity s: (p / s) . q."""
    check_point(manifold, q, tol)
    return product(manifold, right_quotient(manifold, p, s, tol, trust_radius).xi, q, tol)


###############################################################################
# Factorization
###############################################################################


def _orthogonal_unit(a, b):
    v = b - (b @ a) * a
    if np.linalg.norm(v) < 1e-6:
        v = basis(a.size, int(np.argmin(np.abs(a))))
        v = v - (v @ a) * a
    return v / np.linalg.norm(v)


def _waypoint(manifold, current, target, step):
    """A point at ambient distance about step from current in the direction of target."""
    blocks = manifold.descriptor.blocks
    d = ambient_difference(blocks, target.ambient, current.ambient)
    lam = min(1.0, step / np.linalg.norm(d))
    raw = current.ambient + lam * d
    for b in blocks:
        if not b.spherical:
            continue
        a = current.ambient[b.slice]
        goal = target.ambient[b.slice]
        if a @ goal < ANTIPODAL_COS:
            # chords through nearly antipodal points hardly move the direction
            v = _orthogonal_unit(a, goal)
            raw[b.slice] = np.cos(step) * a + np.sin(step) * v
    return manifold.project(raw)


def factorize(manifold, p, s, tol=None, trust_radius=DEFAULT_TRUST_RADIUS, max_steps=10000):
    """Greedy chain [xi_1, ..., xi_k] with p = xi_1 . (xi_2 . ( ... (xi_k . s))).

    Each xi_i lies within trust_radius. Raises StepBudgetError when max_steps
    products do not reach p.
    """
    tol = tol or Tolerances()
    check_point(manifold, p, tol)
    check_point(manifold, s, tol)
    applied = []
    current = s
    while point_distance(manifold, current, p) > tol.newton_tol:
        if len(applied) >= max_steps:
            raise StepBudgetError('factorization on %s did not reach the target in %d steps (distance %.3e)'
                                  % (manifold.id, max_steps, point_distance(manifold, current, p)))
        xi = None
        if point_distance(manifold, current, p) <= trust_radius:
            try:
                xi = right_quotient(manifold, p, current, tol, trust_radius).xi
            except ConvergenceError:
                logger.debug('direct quotient failed at step %d, taking a waypoint', len(applied))
        direct = xi is not None
        step = trust_radius / 2
        while xi is None:
            waypoint = _waypoint(manifold, current, p, step)
            try:
                xi = right_quotient(manifold, waypoint, current, tol, trust_radius).xi
            except ConvergenceError:
                step /= 2
                if step < tol.fd_step_2:
                    raise
        applied.append(xi)
        current = product(manifold, xi, current, tol)
        if direct:
            break
    logger.debug('factorized on %s into %d steps', manifold.id, len(applied))
    return list(reversed(applied))
