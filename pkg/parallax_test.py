import csv
import json
import math

import pytest
from numpy.testing import assert_allclose

import parallax


def load(path):
    with open(path) as f:
        return json.load(f)


def test_list(capsys, tmp_path):
    out = tmp_path / 'list.json'
    assert parallax.main(['list', '--json', str(out)]) == 0
    assert 'sphere_circle2 (n=3, ambient=4)' in capsys.readouterr().out
    payload = load(out)
    assert payload['schema'] == 1
    assert 'torus3' in [e['id'] for e in payload['manifolds']]


def test_verify_passing_suite(tmp_path):
    out = tmp_path / 'report.json'
    code = parallax.main(['verify', 'torus3', '--suite', 'all', '--samples', '2', '--seed', '3', '--json', str(out)])
    assert code == 0
    report = load(out)
    assert report['schema'] == 1
    assert report['manifold'] == 'torus3'
    assert report['seed'] == 3
    assert report['passed'] is True
    assert {r['name'] for r in report['records']} >= {'lts_skew_closed', 'lts_cyclic_fd'}


def test_verify_reports_failed_checks(tmp_path):
    out = tmp_path / 'report.csv'
    code = parallax.main(['verify', '--manifold', 'sphere_sphere_circle2_2', '--suite', 'algebra',
                          '--samples', '2', '--csv', str(out)])
    assert code == 1
    with open(out) as f:
        rows = {r['name']: r for r in csv.DictReader(f)}
    assert rows['jacobi']['passed'] == 'False'
    assert rows['generalized_jacobi']['passed'] == 'True'


def test_verify_is_deterministic(tmp_path):
    paths = [tmp_path / 'a.json', tmp_path / 'b.json']
    for path in paths:
        parallax.main(['verify', 'sphere_circle2', '--suite', 'flows', '--samples', '2', '--json', str(path)])
    assert paths[0].read_text() == paths[1].read_text()


def test_bracket_json_and_csv(tmp_path):
    js, cs = tmp_path / 'b.json', tmp_path / 'b.csv'
    code = parallax.main(['bracket', '--manifold', 'sphere_circle2', '--point', '0,0,1,0',
                          '--json', str(js), '--csv', str(cs)])
    assert code == 0
    b = load(js)['b']
    assert_allclose(b[0][2], [1.0, 0.0, 0.0], atol=1e-14)
    assert_allclose(b[0][1], [0.0, 0.0, 0.0], atol=1e-14)
    with open(cs) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['i', 'j', 'k', 'value']
    assert len(rows) == 1 + 27


def test_assoc_json(tmp_path):
    js = tmp_path / 'a.json'
    assert parallax.main(['assoc', '--manifold', 'sphere_circle2', '--point', '0,0,1,0', '--json', str(js)]) == 0
    payload = load(js)
    assert payload['method'] == 'closed'
    assert_allclose(payload['a'][0][0][1], [0.0, -1.0, 0.0], atol=1e-14)


def test_product(tmp_path):
    js = tmp_path / 'p.json'
    code = parallax.main(['product', '--manifold', 'sphere_circle2', '--point', '1,0,0,0', '--xi', '0,1,0',
                          '--json', str(js)])
    assert code == 0
    assert_allclose(load(js)['endpoint'], [0.648054, 0.761594, 0.0, 0.433781], atol=1e-6)


def test_flow_time(tmp_path):
    js = tmp_path / 'f.json'
    code = parallax.main(['flow', '--manifold', 's3', '--xi', '1,0,0', '--t', '0.5', '--json', str(js)])
    assert code == 0
    assert_allclose(load(js)['endpoint'], [math.cos(0.5), math.sin(0.5), 0.0, 0.0], atol=1e-12)


def test_quotient(tmp_path):
    js = tmp_path / 'q.json'
    code = parallax.main(['quotient', '--manifold', 'sphere_circle2', '--point', '1,0,0,0',
                          '--target-point', '0.648054,0.761594,0,0.433781', '--trust-radius', '1.5',
                          '--json', str(js)])
    assert code == 0
    assert_allclose(load(js)['xi'], [0.0, 1.0, 0.0], atol=1e-5)


def test_factorize(tmp_path):
    js = tmp_path / 'f.json'
    code = parallax.main(['factorize', '--manifold', 'sphere_circle2', '--point', '1,0,0,0',
                          '--target-point', '1,0,0,3.14159', '--json', str(js)])
    assert code == 0
    steps = load(js)['steps']
    assert len(steps) >= 2
    assert all(len(xi) == 3 for xi in steps)


@pytest.mark.parametrize('argv', [
    ['verify', 'klein_bottle'],
    ['bracket'],
    ['product', '--manifold', 'sphere_circle2', '--xi', '1,0'],
    ['quotient', '--manifold', 'sphere_circle2'],
    ['bracket', '--manifold', 'sphere_circle2', '--point', '0,0,0,1'],
    ['verify', 'torus3', '--tol-profile', 'loose'],
    ['frobnicate'],
])
def test_usage_errors(argv, capsys):
    assert parallax.main(argv) == 2


def test_quotient_outside_trust_region_is_an_error():
    code = parallax.main(['quotient', '--manifold', 'sphere_circle2', '--point', '1,0,0,0',
                          '--target-point', '0.648054,0.761594,0,0.433781'])
    assert code == 2


def test_verify_runs_every_requested_sample(tmp_path):
    out = tmp_path / 'loops.json'
    code = parallax.main(['verify', 'torus3', '--suite', 'loops', '--samples', '7', '--seed', '1', '--json', str(out)])
    assert code == 0
    records = {r['name']: r for r in load(out)['records']}
    for name in ('quotient_roundtrip', 'power_associativity', 'quotient_s_roundtrip', 'factorize_reassembly'):
        assert records[name]['samples'] >= 7


def test_verify_progress_lines(capsys):
    assert parallax.main(['verify', 'torus3', '--suite', 'lts', '--samples', '1']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'running suite: lts ...'
    assert any(line.startswith('check: lts_skew_closed ... PASS') for line in lines)
    assert lines[-1].startswith('torus3: ')
