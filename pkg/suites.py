"""
Verification suites: seeded residual checks of the flow, loop, algebra,
geometry, triple-system and morphism identities of a manifold, collected
into a serializable report.
"""

import logging
from typing import Dict, List

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import special_ortho_group

import algebra
import flow as flows
import geometry
import loops
import morphism
from core import __version__, Tolerances, tangent_residual
from manifolds import SphereCircle, SphereProduct, Torus, UnitQuaternions
from utils import check_rng

logger = logging.getLogger(__name__)

SUITES = ('flows', 'loops', 'algebra', 'geometry', 'lts', 'morphisms')
ORTHONORMAL_KINDS = ('torus', 'group', 'sphere_circle', 'composite')


class CheckRecord(BaseModel):
    name: str
    max_residual: float
    tolerance: float
    samples: int
    passed: bool


class Report(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(1, alias='schema')
    version: str = __version__
    command: str = 'verify'
    manifold: str
    suite: str
    seed: int
    samples: int
    tolerances: Dict[str, float]
    records: List[CheckRecord]

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def payload(self):
        data = self.model_dump(by_alias=True)
        data['passed'] = self.passed
        return data


def record(name, residuals, tolerance):
    residuals = [float(r) for r in residuals]
    worst = max(residuals, default=0.0)
    passed = bool(residuals) and all(np.isfinite(residuals)) and worst <= tolerance
    if not passed:
        logger.info('check %s failed: %.3e > %.1e', name, worst, tolerance)
    return CheckRecord(name=name, max_residual=worst, tolerance=tolerance, samples=len(residuals), passed=passed)


def small_element(manifold, rng, radius):
    v = rng.standard_normal(manifold.dim)
    return v * (radius * rng.uniform(0.2, 1.0) / np.linalg.norm(v))


def small_rotation(dim, rng, angle):
    A = rng.standard_normal((dim, dim))
    K = A - A.T
    return scipy.linalg.expm(angle * K / np.linalg.norm(K, 2))


class _Context:
    def __init__(self, manifold, samples, seed, tol):
        self.m = manifold
        self.samples = samples
        self.seed = seed
        self.tol = tol

    def rng(self, name):
        return check_rng(self.seed, '%s/%s' % (self.m.id, name))

    def sample(self, rng, scale=1.0):
        return self.m.random_element(rng, scale), self.m.random_point(rng)


###############################################################################
# Suites
###############################################################################


def _flows(ctx):
    m, tol = ctx.m, ctx.tol
    out = []

    rng = ctx.rng('flow_identity_at_zero')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        res.append(m.distance(flows.flow(m, xi, s, 0.0, tol).endpoint, s))
    out.append(record('flow_identity_at_zero', res, tol.check_tol_analytic))

    rng = ctx.rng('one_parameter_law')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        t1, t2 = rng.uniform(-1.0, 1.0, 2)
        res.append(flows.one_parameter_residual(m, xi, s, t1, t2, tol))
    out.append(record('one_parameter_law', res, tol.check_tol_analytic))

    rng = ctx.rng('reparametrization')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        res.append(flows.reparametrization_residual(m, xi, s, rng.uniform(-1.0, 1.0), rng.uniform(0.5, 2.0), tol))
    out.append(record('reparametrization', res, tol.check_tol_analytic))

    rng = ctx.rng('translate_roundtrip')
    res = []
    for _ in range(ctx.samples):
        xi, p = ctx.sample(rng)
        res.append(flows.translate_roundtrip_residual(m, xi, p, tol))
    out.append(record('translate_roundtrip', res, tol.check_tol_analytic))

    if m.closed_flow:
        rng = ctx.rng('closed_numeric_agreement')
        res = []
        for _ in range(ctx.samples):
            xi, s = ctx.sample(rng)
            res.append(flows.closed_numeric_residual(m, xi, s, rng.uniform(-3.0, 3.0), tol))
        out.append(record('closed_numeric_agreement', res, tol.check_tol_analytic))

    rng = ctx.rng('flow_velocity')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        res.append(flows.velocity_residual(m, xi, s, rng.uniform(-1.0, 1.0), tol))
    out.append(record('flow_velocity', res, tol.check_tol_fd2))

    rng = ctx.rng('frame_tangency')
    res = []
    orth = []
    for _ in range(ctx.samples):
        s = m.random_point(rng)
        F = m.frame_matrix(s.ambient)
        res.append(max(tangent_residual(m.descriptor.blocks, s.ambient, F[:, k]) for k in range(m.dim)))
        orth.append(np.abs(F.T @ F - np.eye(m.dim)).max())
    out.append(record('frame_tangency', res, tol.check_tol_analytic))
    if m.descriptor.kind in ORTHONORMAL_KINDS:
        out.append(record('frame_orthonormal', orth, tol.check_tol_analytic))

    rng = ctx.rng('fundamental_norm_constancy')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        res.append(geometry.fundamental_norm_drift(m, xi, s, np.linspace(-1.0, 1.0, 5), tol=tol))
    out.append(record('fundamental_norm_constancy', res, tol.check_tol_analytic))
    return out


def _loops(ctx):
    m, tol = ctx.m, ctx.tol
    out = []

    rng = ctx.rng('quotient_roundtrip')
    res = []
    for _ in range(ctx.samples):
        s = m.random_point(rng)
        xi = small_element(m, rng, 0.3)
        q = loops.right_quotient(m, flows.product(m, xi, s, tol), s, tol).xi
        res.append(np.linalg.norm(q - xi))
    out.append(record('quotient_roundtrip', res, tol.check_tol_analytic))

    rng = ctx.rng('two_sided_identity')
    res = []
    zero = np.zeros(m.dim)
    for _ in range(ctx.samples):
        s = m.random_point(rng)
        xi = small_element(m, rng, 0.3)
        res.append(np.linalg.norm(loops.local_product(m, zero, xi, s, tol) - xi))
        res.append(np.linalg.norm(loops.local_product(m, xi, zero, s, tol) - xi))
    out.append(record('two_sided_identity', res, tol.check_tol_analytic))

    rng = ctx.rng('power_associativity')
    res = []
    for _ in range(ctx.samples):
        s = m.random_point(rng)
        xi = small_element(m, rng, 0.08)
        k = int(rng.integers(2, 6))
        res.append(np.linalg.norm(loops.power(m, xi, k, s, tol) - k * xi))
    out.append(record('power_associativity', res, tol.check_tol_analytic))

    rng = ctx.rng('quotient_s_roundtrip')
    res = []
    for _ in range(ctx.samples):
        s = m.random_point(rng)
        xi = small_element(m, rng, 0.15)
        eta = small_element(m, rng, 0.15)
        prod = loops.local_product(m, eta, xi, s, tol)
        res.append(np.linalg.norm(loops.right_quotient_s(m, prod, xi, s, tol) - eta))
        prod = loops.local_product(m, xi, eta, s, tol)
        res.append(np.linalg.norm(loops.left_quotient_s(m, xi, prod, s, tol) - eta))
    out.append(record('quotient_s_roundtrip', res, tol.check_tol_analytic))

    rng = ctx.rng('factorize_reassembly')
    res = []
    for _ in range(ctx.samples):
        s = m.random_point(rng)
        p = m.random_point(rng)
        q = s
        for xi in reversed(loops.factorize(m, p, s, tol)):
            q = flows.product(m, xi, q, tol)
        res.append(m.distance(q, p))
    out.append(record('factorize_reassembly', res, tol.check_tol_analytic))
    return out


def _algebra(ctx):
    m, tol = ctx.m, ctx.tol
    out = []

    rng = ctx.rng('bracket_antisymmetry')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        eta = m.random_element(rng)
        res.append(np.linalg.norm(algebra.bracket(m, s, xi, eta, tol) + algebra.bracket(m, s, eta, xi, tol)))
    out.append(record('bracket_antisymmetry', res, tol.check_tol_analytic))

    if m.closed_brackets:
        rng = ctx.rng('bracket_fd_agreement')
        res = []
        for _ in range(ctx.samples):
            xi, s = ctx.sample(rng)
            eta = m.random_element(rng)
            res.append(np.linalg.norm(algebra.bracket(m, s, xi, eta, tol, 'closed')
                                      - algebra.bracket(m, s, xi, eta, tol, 'fd')))
        out.append(record('bracket_fd_agreement', res, tol.check_tol_fd2))

    rng = ctx.rng('bracket_commutator_agreement')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        eta = m.random_element(rng)
        res.append(np.linalg.norm(algebra.bracket_via_commutator(m, s, xi, eta, tol)
                                  - algebra.bracket(m, s, xi, eta, tol)))
    out.append(record('bracket_commutator_agreement', res, tol.check_tol_fd2))

    rng = ctx.rng('structure_equation')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        res.append(np.linalg.norm(algebra.structure_equation_residual(m, s, xi, m.random_element(rng), tol)))
    out.append(record('structure_equation', res, tol.check_tol_fd2))

    rng = ctx.rng('jacobi')
    res = []
    gen = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        eta, gamma = m.random_element(rng), m.random_element(rng)
        res.append(np.linalg.norm(algebra.jacobi_residual(m, s, xi, eta, gamma, tol)))
        gen.append(np.linalg.norm(algebra.generalized_jacobi_residual(m, s, xi, eta, gamma, tol)))
    out.append(record('jacobi', res, tol.check_tol_analytic))
    out.append(record('generalized_jacobi', gen, tol.check_tol_fd2))

    if isinstance(m, SphereCircle):
        rng = ctx.rng('semidirect_homomorphism')
        res = []
        for _ in range(ctx.samples):
            xi, s = ctx.sample(rng)
            res.append(algebra.semidirect_homomorphism_residual(m, s, xi, m.random_element(rng), tol))
        out.append(record('semidirect_homomorphism', res, tol.check_tol_analytic))

    rng = ctx.rng('associator_skew_part')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        eta, gamma = m.random_element(rng), m.random_element(rng)
        skew = (algebra.associator_bracket(m, s, xi, eta, gamma, tol)
                - algebra.associator_bracket(m, s, eta, xi, gamma, tol))
        res.append(np.linalg.norm(skew - algebra.skew_associator(m, s, gamma, xi, eta, tol)))
    out.append(record('associator_skew_part', res, tol.check_tol_fd3))
    return out


def _geometry(ctx):
    m, tol = ctx.m, ctx.tol
    out = []

    rng = ctx.rng('torsion_metric')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        res.append(geometry.torsion_metric_residual(m, s, xi, m.random_element(rng), m.random_element(rng), tol=tol))
    out.append(record('torsion_metric', res, tol.check_tol_analytic))

    rng = ctx.rng('metricity')
    res = []
    n_amb = m.descriptor.ambient_dim
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        fx = geometry.tangent_field(m, rng.standard_normal(n_amb))
        fy = geometry.tangent_field(m, rng.standard_normal(n_amb))
        res.append(geometry.metricity_residual(m, s, fx, fy, xi, tol=tol))
    out.append(record('metricity', res, tol.check_tol_fd2))

    if m.closed_associator:
        rng = ctx.rng('nabla_torsion_fd_agreement')
        res = []
        for _ in range(ctx.samples):
            d, s = ctx.sample(rng)
            xi, eta = m.random_element(rng), m.random_element(rng)
            res.append(np.linalg.norm(geometry.nabla_torsion(m, s, xi, eta, d, tol, 'closed')
                                      - geometry.nabla_torsion(m, s, xi, eta, d, tol, 'fd')))
        out.append(record('nabla_torsion_fd_agreement', res, tol.check_tol_fd2))

    if m.descriptor.kind in ('torus', 'group'):
        rng = ctx.rng('torsion_totally_skew')
        res = []
        for _ in range(ctx.samples):
            xi, s = ctx.sample(rng)
            res.append(abs(geometry.skew_adjoint_residual(m, s, xi, m.random_element(rng), m.random_element(rng),
                                                          tol=tol)))
        out.append(record('torsion_totally_skew', res, tol.check_tol_analytic))

    rng = ctx.rng('retrivialization_constant')
    res = []
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        Q = special_ortho_group.rvs(m.dim, random_state=rng) if m.dim > 1 else np.array([[2.0]])
        retriv = geometry.retrivialize(m, Q)
        res.append(geometry.retrivialization_bracket_residual(retriv, retriv.point(s), xi, m.random_element(rng), tol))
    out.append(record('retrivialization_constant', res, tol.check_tol_fd2))

    rng = ctx.rng('retrivialization_varying')
    res = []
    n = m.dim
    field = geometry.QField(lambda p: np.eye(n) + 0.25 * np.diag(np.cos(p.ambient[:n])))
    retriv = geometry.retrivialize(m, field, 'cos')
    for _ in range(ctx.samples):
        xi, s = ctx.sample(rng)
        res.append(geometry.retrivialization_bracket_residual(retriv, retriv.point(s), xi, m.random_element(rng), tol))
    out.append(record('retrivialization_varying', res, tol.check_tol_fd2))
    return out


def _lts(ctx):
    m, tol = ctx.m, ctx.tol
    out = []
    methods = (('closed', tol.check_tol_analytic), ('fd', tol.check_tol_fd3)) if m.closed_associator \
        else (('fd', tol.check_tol_fd3),)
    for method, tolerance in methods:
        rng = ctx.rng('lts_%s' % method)
        reports = [algebra.lts_residuals(m, m.random_point(rng), tol, method) for _ in range(ctx.samples)]
        out.append(record('lts_skew_%s' % method, [r.skew for r in reports], tolerance))
        out.append(record('lts_cyclic_%s' % method, [r.cyclic for r in reports], tolerance))
        out.append(record('lts_derivation_%s' % method, [r.derivation for r in reports], tolerance))
    return out


def _automorphisms(m, rng):
    if isinstance(m, SphereCircle):
        return [morphism.sphere_automorphism(m, special_ortho_group.rvs(m.m + 1, random_state=rng),
                                             rng.uniform(0.0, 2 * np.pi))]
    if isinstance(m, SphereProduct):
        return [morphism.sphere_rotation_pair(m, special_ortho_group.rvs(m.m + 1, random_state=rng))]
    if isinstance(m, Torus):
        return [morphism.torus_translation_pair(m, rng.uniform(0.0, 2 * np.pi, m.dim))]
    if isinstance(m, UnitQuaternions):
        return [morphism.quaternion_conjugation_pair(m, rng.standard_normal(4))]
    return [morphism.CandidatePair(lambda p: p, np.eye(m.dim), 'identity')]


def _small_automorphism(m, rng):
    if isinstance(m, SphereCircle):
        return morphism.sphere_automorphism(m, small_rotation(m.m + 1, rng, 0.15), 0.05)
    if isinstance(m, SphereProduct):
        return morphism.sphere_rotation_pair(m, small_rotation(m.m + 1, rng, 0.15))
    if isinstance(m, Torus):
        return morphism.torus_translation_pair(m, rng.uniform(-0.05, 0.05, m.dim))
    if isinstance(m, UnitQuaternions):
        return morphism.quaternion_conjugation_pair(m, np.append(1.0, rng.uniform(-0.05, 0.05, 3)))
    return morphism.CandidatePair(lambda p: p, np.eye(m.dim), 'identity')


def _morphisms(ctx):
    m, tol = ctx.m, ctx.tol
    out = []

    rng = ctx.rng('morphism_law')
    res = []
    eq = []
    for _ in range(ctx.samples):
        pair = _automorphisms(m, rng)[0]
        xi, s = ctx.sample(rng)
        res.append(morphism.morphism_residual(m, pair, [(xi, s)], tol))
        eq.append(morphism.bracket_equivariance_residual(m, pair, s, xi, m.random_element(rng), tol))
    out.append(record('morphism_law', res, tol.check_tol_analytic))
    out.append(record('bracket_equivariance', eq, tol.check_tol_analytic))

    rng = ctx.rng('pseudoautomorphism')
    res = []
    for _ in range(ctx.samples):
        pair = _small_automorphism(m, rng)
        s = m.random_point(rng)
        companion = morphism.stabilizer_companion(m, pair, s, tol)
        samples = [(small_element(m, rng, 0.12), small_element(m, rng, 0.12))]
        res.append(morphism.pseudoautomorphism_residual(m, pair.h_prime, companion, s, samples, tol))
    out.append(record('pseudoautomorphism', res, morphism.MORPHISM_TOL))

    if isinstance(m, SphereCircle):
        rng = ctx.rng('composition_closure')
        res = []
        for _ in range(ctx.samples):
            a, b = _automorphisms(m, rng)[0], _automorphisms(m, rng)[0]
            direct = morphism.sphere_automorphism(m, a.params['R'] @ b.params['R'], a.params['c'] + b.params['c'])
            probes = [m.random_point(rng) for _ in range(3)]
            res.append(morphism.probe_agreement(m, morphism.compose(a, b), direct, probes))
        out.append(record('composition_closure', res, tol.check_tol_analytic))

    rng = ctx.rng('embedding_reconstruction')
    res = []
    for _ in range(ctx.samples):
        pair = _automorphisms(m, rng)[0]
        s, p = m.random_point(rng), m.random_point(rng)
        emb = morphism.automorphism_embedding(m, pair, s, tol)
        res.append(m.distance(morphism.reconstruct_image(m, emb, s, p, tol), pair.h(p)))
    out.append(record('embedding_reconstruction', res, morphism.MORPHISM_TOL))
    return out


_RUNNERS = {
    'flows': _flows,
    'loops': _loops,
    'algebra': _algebra,
    'geometry': _geometry,
    'lts': _lts,
    'morphisms': _morphisms,
}


def run_suite(manifold, suite='all', samples=20, seed=0, tol=None, on_suite=None, on_record=None):
    """Run the named suite, or all of them, and collect one record per check.

    on_suite is called with each suite name before that suite runs and on_record with
    each finished record.
    """
    tol = tol or Tolerances()
    if suite != 'all' and suite not in _RUNNERS:
        raise ValueError('unknown suite %r, expected one of all, %s' % (suite, ', '.join(SUITES)))
    if samples < 1:
        raise ValueError('samples must be positive')
    ctx = _Context(manifold, samples, seed, tol)
    records = []
    for name in (SUITES if suite == 'all' else (suite,)):
        logger.info('running %s suite on %s', name, manifold.id)
        if on_suite is not None:
            on_suite(name)
        done = _RUNNERS[name](ctx)
        if on_record is not None:
            for r in done:
                on_record(r)
        records.extend(done)
    return Report(manifold=manifold.id, suite=suite, seed=seed, samples=samples,
                  tolerances={k: float(v) for k, v in vars(tol).items()}, records=records)
