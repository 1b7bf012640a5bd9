import csv
import json
import logging
import os
import zlib

import numpy as np

from core import ConfigError, Tolerances

logger = logging.getLogger(__name__)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'config')


class Struct:
    def __init__(self, **entries):
        self.__dict__.update(entries)


def parse_config(path_to_json=r'./config/tol-default.json'):
    try:
        with open(path_to_json) as f:
            data = json.load(f)
    except (OSError, ValueError) as exc:
        raise ConfigError('cannot read config %s: %s' % (path_to_json, exc))
    if not isinstance(data, dict):
        raise ConfigError('config %s must hold a JSON object' % path_to_json)
    return Struct(**data)


def profile_path(profile):
    return os.path.join(CONFIG_DIR, 'tol-%s.json' % profile)


def load_tolerances(profile='default', path=None):
    """Tolerances from an explicit config file, else from config/tol-<profile>.json."""
    path = path or profile_path(profile)
    if not os.path.exists(path):
        raise ConfigError('no tolerance profile %r (looked for %s)' % (profile, path))
    tol = Tolerances.from_config(parse_config(path))
    logger.debug('tolerances from %s: %s', path, tol)
    return tol


def parse_vector(text):
    """'1,0,0.5' -> array([1., 0., 0.5])."""
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ConfigError('cannot parse %r as comma-separated numbers' % text)
    if not values:
        raise ConfigError('empty coordinate list')
    return np.array(values)


def check_rng(seed, name):
    """Generator for one named check, independent of the order checks run in."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode('utf-8'))])


def to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dump_json(payload):
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2)


def write_json_report(path, payload):
    text = dump_json(payload)
    with open(path, 'w') as f:
        f.write(text + '\n')
    logger.info('wrote %s', path)


def tensor_rows(tensor):
    """Flatten an array into (index..., value) rows."""
    tensor = np.asarray(tensor)
    return [tuple(idx) + (float(tensor[idx]),) for idx in np.ndindex(*tensor.shape)]


def write_csv(path, header, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, '.17g') if isinstance(v, float) else v for v in row])
    logger.info('wrote %s', path)
