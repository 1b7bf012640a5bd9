"""
Flows of fundamental vector fields and the induced product xi . s.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853

from core import (IntegrationError, Point, Tolerances, algebra_element, ambient_difference, check_point,
                  constraint_residual, normalize_point, point_distance, project_blocks)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FlowResult:
    endpoint: Point
    steps_taken: int
    max_constraint_drift: float


def _integrate(manifold, xi, s, t, tol):
    blocks = manifold.descriptor.blocks

    def rhs(_, y):
        return manifold.extended_frame(y) @ xi

    solver = DOP853(rhs, 0.0, np.array(s.ambient), t, rtol=tol.ode_rel_tol, atol=tol.ode_abs_tol,
                    first_step=abs(t) / 16.0)
    steps = 0
    drift = 0.0
    while solver.status == 'running':
        message = solver.step()
        if solver.status == 'failed':
            raise IntegrationError('flow on %s failed after %d steps: %s' % (manifold.id, steps, message))
        steps += 1
        drift = max(drift, constraint_residual(blocks, solver.y))
        # pull the state back onto the manifold and keep the derivative consistent with it
        solver.y = project_blocks(blocks, solver.y)
        solver.f = solver.fun(solver.t, solver.y)
    if drift > 100 * tol.point_tol:
        logger.warning('flow on %s drifted %.2e off the manifold before projection', manifold.id, drift)
    return normalize_point(manifold, solver.y), steps, drift


def flow(manifold, xi, s, t, tol=None, method='auto'):
    """Endpoint of the integral curve of rho(xi) from s after time t.

    method: "auto" uses the closed form when the manifold has one, "closed"
    requires it and "numeric" always integrates.
    """
    tol = tol or Tolerances()
    xi = algebra_element(xi, manifold.dim)
    check_point(manifold, s, tol)
    t = float(t)
    if method not in ('auto', 'closed', 'numeric'):
        raise ValueError('unknown flow method %r' % method)
    if method == 'closed' and not manifold.closed_flow:
        raise ValueError('%s has no closed-form flow' % manifold.id)

    if t == 0.0 or not np.any(xi):
        return FlowResult(s, 0, 0.0)
    if manifold.closed_flow and method != 'numeric':
        return FlowResult(normalize_point(manifold, manifold.flow_closed(xi, s.ambient, t)), 0, 0.0)

    endpoint, steps, drift = _integrate(manifold, xi, s, t, tol)
    logger.debug('flow on %s: |xi|=%.3g t=%.3g in %d steps, drift %.2e',
                 manifold.id, np.linalg.norm(xi), t, steps, drift)
    return FlowResult(endpoint, steps, drift)


def product(manifold, xi, s, tol=None, method='auto'):
    """xi . s, the time-one flow of rho(xi) from s."""
    return flow(manifold, xi, s, 1.0, tol, method).endpoint


def left_translate(manifold, xi, p, tol=None):
    return product(manifold, xi, p, tol)


def left_translate_inverse(manifold, xi, p, tol=None):
    return product(manifold, -algebra_element(xi, manifold.dim), p, tol)


###############################################################################
# Residuals of the flow laws
###############################################################################


def one_parameter_residual(manifold, xi, s, t1, t2, tol=None):
    """Distance between (t1 xi).((t2 xi).s) and ((t1 + t2) xi).s."""
    xi = algebra_element(xi, manifold.dim)
    lhs = flow(manifold, xi, flow(manifold, xi, s, t2, tol).endpoint, t1, tol).endpoint
    rhs = flow(manifold, xi, s, t1 + t2, tol).endpoint
    return point_distance(manifold, lhs, rhs)


def reparametrization_residual(manifold, xi, s, t, scale, tol=None):
    """Distance between flow(scale xi, t) and flow(xi, scale t)."""
    xi = algebra_element(xi, manifold.dim)
    a = flow(manifold, scale * xi, s, t, tol).endpoint
    b = flow(manifold, xi, s, scale * t, tol).endpoint
    return point_distance(manifold, a, b)


def closed_numeric_residual(manifold, xi, s, t, tol=None):
    """Distance between the closed-form and the integrated flow, None without a closed form."""
    if not manifold.closed_flow:
        return None
    a = flow(manifold, xi, s, t, tol, method='closed').endpoint
    b = flow(manifold, xi, s, t, tol, method='numeric').endpoint
    return point_distance(manifold, a, b)


def translate_roundtrip_residual(manifold, xi, p, tol=None):
    q = left_translate_inverse(manifold, xi, left_translate(manifold, xi, p, tol), tol)
    return point_distance(manifold, q, p)


def velocity_residual(manifold, xi, s, t, tol=None):
    """Central-difference velocity of the flow curve at time t against rho(xi) there."""
    tol = tol or Tolerances()
    xi = algebra_element(xi, manifold.dim)
    h = tol.fd_step_1
    p = flow(manifold, xi, s, t, tol).endpoint
    ahead = flow(manifold, xi, p, h, tol).endpoint
    behind = flow(manifold, xi, p, -h, tol).endpoint
    velocity = ambient_difference(manifold.descriptor.blocks, ahead.ambient, behind.ambient) / (2 * h)
    return float(np.linalg.norm(velocity - manifold.frame_matrix(p.ambient) @ xi))
