"""
Command line front end.

    python parallax.py list
    python parallax.py verify sphere_circle2 --suite lts --samples 20 --seed 0 --json report.json
    python parallax.py bracket --manifold sphere_circle2 --point 0,0,1,0 --csv b.csv
    python parallax.py product --manifold sphere_circle2 --point 1,0,0,0 --xi 0,1,0

Exit status is 0 on success, 1 when a verification check fails and 2 on
usage or library errors.
"""

import argparse
import logging
import sys

import numpy as np

import algebra
import loops
import manifolds
import suites
import utils
from core import ParallaxError, __version__
from flow import flow

logger = logging.getLogger('parallax')

COMMANDS = ('list', 'verify', 'bracket', 'assoc', 'flow', 'product', 'quotient', 'factorize')

parser = argparse.ArgumentParser(description='PARALLAX: loops and brackets of parallelized manifolds')
parser.add_argument('command', choices=COMMANDS)
parser.add_argument('target', nargs='?', default=None, metavar='MANIFOLD',
                    help='manifold key for verify (same as --manifold)')
parser.add_argument('--manifold', type=str, default=None, help='catalog key, e.g. sphere_circle2')
parser.add_argument('--point', type=str, default=None, help='comma-separated ambient coordinates of s')
parser.add_argument('--target-point', dest='target_point', type=str, default=None,
                    help='comma-separated ambient coordinates of p for quotient and factorize')
parser.add_argument('--xi', type=str, default=None)
parser.add_argument('--eta', type=str, default=None)
parser.add_argument('--gamma', type=str, default=None)
parser.add_argument('--t', type=float, default=1.0, help='flow time')
parser.add_argument('--method', type=str, default='auto', choices=('auto', 'closed', 'fd', 'numeric'))
parser.add_argument('--trust-radius', dest='trust_radius', type=float, default=loops.DEFAULT_TRUST_RADIUS)
parser.add_argument('--suite', type=str, default='all', choices=('all',) + suites.SUITES)
parser.add_argument('--samples', type=int, default=20)
parser.add_argument('--seed', type=int, default=0)
parser.add_argument('--json', type=str, default=None, metavar='PATH', help='write the result as JSON')
parser.add_argument('--csv', type=str, default=None, metavar='PATH', help='write the result as CSV')
parser.add_argument('--tol-profile', dest='tol_profile', type=str, default='default',
                    help='tolerance profile under config/ (default, strict)')
parser.add_argument('--config', type=str, default=None, help='explicit tolerance config file')
parser.add_argument('-v', '--verbose', action='count', default=0)


class Parallax:

    def __init__(self, args):
        self.args = args
        self.tol = utils.load_tolerances(args.tol_profile, args.config)
        key = args.manifold or args.target
        self.manifold = manifolds.get(key) if key else None

    def need_manifold(self):
        if self.manifold is None:
            raise ParallaxError('%s needs a manifold (--manifold KEY)' % self.args.command)
        return self.manifold

    def point(self, text):
        m = self.need_manifold()
        if text is None:
            return m.basepoint()
        return manifolds.point_from_coords(m, utils.parse_vector(text), self.tol)

    def element(self, text, name):
        m = self.need_manifold()
        if text is None:
            raise ParallaxError('%s needs --%s' % (self.args.command, name))
        v = utils.parse_vector(text)
        if v.size != m.dim:
            raise ParallaxError('--%s has %d entries, %s has dimension %d' % (name, v.size, m.id, m.dim))
        return v

    def header(self, **fields):
        payload = {'schema': 1, 'version': __version__, 'command': self.args.command}
        if self.manifold is not None:
            payload['manifold'] = self.manifold.id
        payload.update(fields)
        return payload

    def emit(self, payload, csv_header=None, csv_rows=None):
        if self.args.json:
            utils.write_json_report(self.args.json, payload)
        if self.args.csv and csv_header is not None:
            utils.write_csv(self.args.csv, csv_header, csv_rows)
        if not self.args.json and not self.args.csv:
            print(utils.dump_json(payload))

    ###########################################################################

    def run_list(self):
        entries = [{'id': d.id, 'intrinsic_dim': d.intrinsic_dim, 'ambient_dim': d.ambient_dim, 'kind': d.kind}
                   for d in manifolds.catalog()]
        for e in entries:
            print('%s (n=%d, ambient=%d) %s' % (e['id'], e['intrinsic_dim'], e['ambient_dim'], e['kind']))
        if self.args.json:
            utils.write_json_report(self.args.json, self.header(manifolds=entries))
        return 0

    def run_verify(self):
        m = self.need_manifold()
        report = suites.run_suite(
            m, self.args.suite, self.args.samples, self.args.seed, self.tol,
            on_suite=lambda name: print('running suite: %s ...' % name),
            on_record=lambda r: print('check: %s ... %s (max residual %.3e, tol %.1e, %d samples)'
                                      % (r.name, 'PASS' if r.passed else 'FAIL', r.max_residual, r.tolerance,
                                         r.samples)))
        print('%s: %d/%d checks passed' % (m.id, sum(r.passed for r in report.records), len(report.records)))
        if self.args.json:
            utils.write_json_report(self.args.json, report.payload())
        if self.args.csv:
            utils.write_csv(self.args.csv, ('name', 'max_residual', 'tolerance', 'samples', 'passed'),
                            [(r.name, r.max_residual, r.tolerance, r.samples, r.passed) for r in report.records])
        return 0 if report.passed else 1

    def run_bracket(self):
        s = self.point(self.args.point)
        method = 'auto' if self.args.method == 'numeric' else self.args.method
        bt = algebra.bracket_tensor(self.need_manifold(), s, self.tol, method)
        payload = self.header(point=s.ambient, method=bt.method,
                              indexing='b[i][j][k]: k-th coefficient of b(e_i, e_j), 0-based', b=bt.b)
        self.emit(payload, ('i', 'j', 'k', 'value'), utils.tensor_rows(bt.b))
        return 0

    def run_assoc(self):
        s = self.point(self.args.point)
        method = 'auto' if self.args.method == 'numeric' else self.args.method
        at = algebra.associator_tensor(self.need_manifold(), s, self.tol, method)
        payload = self.header(point=s.ambient, method=at.method,
                              indexing='a[d][i][j][k]: k-th coefficient of a(e_d; e_i, e_j), direction first, 0-based',
                              a=at.a)
        self.emit(payload, ('d', 'i', 'j', 'k', 'value'), utils.tensor_rows(at.a))
        return 0

    def _flow(self, t):
        m = self.need_manifold()
        s = self.point(self.args.point)
        xi = self.element(self.args.xi, 'xi')
        method = self.args.method if self.args.method in ('auto', 'closed', 'numeric') else 'numeric'
        result = flow(m, xi, s, t, self.tol, method)
        payload = self.header(point=s.ambient, xi=xi, t=t, endpoint=result.endpoint.ambient,
                              steps_taken=result.steps_taken, max_constraint_drift=result.max_constraint_drift)
        rows = [(k, float(v)) for k, v in enumerate(result.endpoint.ambient)]
        self.emit(payload, ('index', 'value'), rows)
        return 0

    def run_flow(self):
        return self._flow(self.args.t)

    def run_product(self):
        return self._flow(1.0)

    def run_quotient(self):
        m = self.need_manifold()
        s = self.point(self.args.point)
        if self.args.target_point is None:
            raise ParallaxError('quotient needs --target-point')
        p = self.point(self.args.target_point)
        solve = loops.right_quotient(m, p, s, self.tol, self.args.trust_radius)
        payload = self.header(point=s.ambient, target=p.ambient, xi=solve.xi, iterations=solve.iterations,
                              residual=solve.residual)
        self.emit(payload, ('index', 'value'), [(k, float(v)) for k, v in enumerate(solve.xi)])
        return 0

    def run_factorize(self):
        m = self.need_manifold()
        s = self.point(self.args.point)
        if self.args.target_point is None:
            raise ParallaxError('factorize needs --target-point')
        p = self.point(self.args.target_point)
        steps = loops.factorize(m, p, s, self.tol, self.args.trust_radius)
        payload = self.header(point=s.ambient, target=p.ambient, trust_radius=self.args.trust_radius,
                              steps=np.array(steps))
        rows = [(i, k, float(v)) for i, xi in enumerate(steps) for k, v in enumerate(xi)]
        self.emit(payload, ('step', 'k', 'value'), rows)
        return 0

    def run(self):
        return getattr(self, 'run_%s' % self.args.command)()


def main(argv=None):
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    try:
        return Parallax(args).run()
    except (ParallaxError, ValueError) as exc:
        logger.error('%s', exc)
        print('error: %s' % exc, file=sys.stderr)
        return 2


if __name__ == '__main__':

    sys.exit(main())
