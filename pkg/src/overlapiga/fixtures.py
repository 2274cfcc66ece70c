"""Problem configurations: JSON schema, loaders and the shipped fixtures.

A configuration is a JSON document::

    {
      "name": "...",
      "patches": [{"degree": [pu, pv], "knots": [ku, kv],
                   "control_points": [[[x, y], ...], ...],
                   "weights": null, "mesh": [mu, mv]}, ...],
      "boundary_conditions": [{"patch": 0, "side": "left",
                               "type": "dirichlet", "data": "exact"}, ...],
      "solution": "square",
      "study": {...}
    }

The patch order is the hierarchy (index 0 at the bottom). ``mesh`` gives the
analysis elements per geometry element at level 0; level ``l`` multiplies it
by ``2**l``. The analysis degree is set per study. Sides without an entry
carry Neumann data; ``data`` may be ``"exact"`` (from the solution) only.
"""
import copy
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .assembly import ProblemSpec
from .splines import SIDES, KnotVector, SplinePatch

DEFAULT_STUDY = {
    'degrees': [2, 3, 4],
    'levels': 4,
    'flux': 'onesided',
    'stabilize': True,
    'theta': 0.1,
    'beta': '6p2',
    'kappa': 'auto',
}


def patch_from_config(pc):
    """Geometry patch from a configuration entry."""
    pu, pv = pc['degree']
    ku, kv = pc['knots']
    cp = np.asarray(pc['control_points'], dtype=float)
    w = pc.get('weights')
    return SplinePatch(KnotVector(pu, ku), KnotVector(pv, kv), cp,
                       None if w is None else np.asarray(w, dtype=float))


def patch_to_config(patch, mesh):
    kvu, kvv = patch.basis.kvs
    return {
        'degree': [kvu.p, kvv.p],
        'knots': [kvu.knots.tolist(), kvv.knots.tolist()],
        'control_points': patch.control_points.tolist(),
        'weights': None if patch.weights is None else patch.weights.tolist(),
        'mesh': list(mesh),
    }


@dataclass
class Problem:
    """Parsed configuration."""
    name: str
    config: dict

    @property
    def study(self):
        s = dict(DEFAULT_STUDY)
        s.update(self.config.get('study', {}))
        return s

    @property
    def solution(self):
        return self.config.get('solution', 'none')

    def geometry(self):
        return [patch_from_config(pc) for pc in self.config['patches']]

    def patches(self, level, degree):
        """Patches with analysis spaces of ``degree`` at refinement ``level``."""
        out = []
        for pc, g in zip(self.config['patches'], self.geometry()):
            mu, mv = pc.get('mesh', [1, 1])
            out.append(g.with_space(degree, (mu * 2 ** level, mv * 2 ** level)))
        return out

    def dirichlet(self):
        out = []
        for bc in self.config.get('boundary_conditions', []):
            if bc['side'] not in SIDES:
                raise ValueError('unknown side %r' % bc['side'])
            kind = bc.get('type', 'neumann')
            if kind not in ('dirichlet', 'neumann'):
                raise ValueError('boundary condition type must be dirichlet or neumann')
            if bc.get('data', 'exact') != 'exact':
                raise ValueError('only "exact" boundary data is supported')
            if kind == 'dirichlet':
                out.append((int(bc['patch']), bc['side']))
        return out

    def spec(self, solution=None, **overrides):
        """:class:`ProblemSpec` from the study settings and overrides."""
        s = self.study
        s.update({k: v for k, v in overrides.items() if v is not None})
        sol = solution or (self.solution if self.solution != 'none' else 'zero')
        return ProblemSpec(sol, flux=s['flux'], stabilize=bool(s['stabilize']),
                           beta=s['beta'], theta=float(s['theta']), dirichlet=self.dirichlet())

    def with_epsilon(self, eps):
        """Copy with the study's shifted control points moved to ``base + eps``."""
        shift = self.study.get('shift')
        if shift is None:
            raise ValueError('configuration has no "shift" entry for epsilon studies')
        cfg = copy.deepcopy(self.config)
        cp = cfg['patches'][shift['patch']]['control_points']
        for a, b in shift['indices']:
            cp[a][b][shift['coordinate']] = shift['base'] + eps
        cfg['study']['epsilon'] = eps
        return Problem(self.name, cfg)


def load_config(source):
    """Problem from a path, a JSON string, a dict or a shipped fixture name."""
    if isinstance(source, dict):
        cfg = copy.deepcopy(source)
    elif isinstance(source, str) and source in BUILTIN:
        cfg = BUILTIN[source]()
    elif isinstance(source, str) and source.lstrip().startswith('{'):
        cfg = json.loads(source)
    else:
        with open(source) as fh:
            cfg = json.load(fh)
    for key in ('patches',):
        if key not in cfg:
            raise ValueError('configuration lacks %r' % key)
    return Problem(cfg.get('name', 'problem'), cfg)


def _rect(x0, x1, y0, y1, mesh):
    return _quad([(x0, y0), (x1, y0), (x0, y1), (x1, y1)], mesh)


def _quad(c, mesh):
    return {
        'degree': [1, 1],
        'knots': [[0, 0, 1, 1], [0, 0, 1, 1]],
        'control_points': [[list(c[0]), list(c[2])], [list(c[1]), list(c[3])]],
        'weights': None,
        'mesh': list(mesh),
    }


def square_config(eps=1e-6):
    """Unit square: bottom patch with a 4x3 mesh, top [0.5+eps, 1] x [0, 1] with 2x2."""
    return {
        'name': 'square',
        'patches': [_rect(0.0, 1.0, 0.0, 1.0, (4, 3)), _rect(0.5 + eps, 1.0, 0.0, 1.0, (2, 2))],
        'boundary_conditions': [{'patch': 0, 'side': 'left', 'type': 'dirichlet', 'data': 'exact'}],
        'solution': 'square',
        'study': {
            'epsilon': eps,
            'epsilons': [1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            'shift': {'patch': 1, 'indices': [[0, 0], [0, 1]], 'coordinate': 0, 'base': 0.5},
            'conditioning_levels': [2, 3, 4, 5],
        },
    }


def _annulus():
    s = float(np.sqrt(0.5))
    cp, w = [], []
    for r in (1.0, 1.5, 2.0):
        cp.append([[r, 0.0], [r, r], [0.0, r]])
        w.append([1.0, s, 1.0])
    return {
        'degree': [2, 2],
        'knots': [[0, 0, 0, 1, 1, 1], [0, 0, 0, 1, 1, 1]],
        'control_points': cp,
        'weights': w,
        'mesh': [5, 5],
    }


def disk_config(annulus_on_top=True):
    """Quarter disk of radius 2: quarter annulus (1, 2) and rectangle [0, 1.13] x [0, 1.17]."""
    rect = _rect(0.0, 1.13, 0.0, 1.17, (4, 4))
    ann = _annulus()
    patches = [rect, ann] if annulus_on_top else [ann, rect]
    a = 1 if annulus_on_top else 0
    return {
        'name': 'disk-%s' % ('annulus-top' if annulus_on_top else 'rectangle-top'),
        'patches': patches,
        'boundary_conditions': [{'patch': a, 'side': 'right', 'type': 'dirichlet', 'data': 'exact'}],
        'solution': 'disk',
        'study': {},
    }


def three_patch_config():
    """Three overlapping quadrilaterals with one triple-overlap region.

    Orange (bottom) ``[0, 0.62] x [0, 1]``, blue ``[0.36, 1] x [0, 0.63]`` and
    green (top), a quadrilateral whose slanted left side cuts blue elements
    next to the blue-orange interface.
    """
    orange = _rect(0.0, 0.62, 0.0, 1.0, (5, 8))
    blue = _rect(0.36, 1.0, 0.0, 0.63, (5, 5))
    green = _quad([(0.452, 0.43), (0.9, 0.41), (0.481, 1.0), (0.9, 1.0)], (4, 5))
    return {
        'name': 'three-patch',
        'patches': [orange, blue, green],
        'boundary_conditions': [
            {'patch': 0, 'side': 'left', 'type': 'dirichlet', 'data': 'exact'},
            {'patch': 1, 'side': 'bottom', 'type': 'dirichlet', 'data': 'exact'},
            {'patch': 1, 'side': 'right', 'type': 'dirichlet', 'data': 'exact'},
        ],
        'solution': 'three_patch',
        'study': {},
    }


BUILTIN = {
    'square': square_config,
    'disk-annulus-top': lambda: disk_config(True),
    'disk-rectangle-top': lambda: disk_config(False),
    'three-patch': three_patch_config,
}


def shipped_config_path(name):
    """Path of a JSON fixture shipped with the package."""
    return resources.files('overlapiga').joinpath('fixtures', name + '.json')


def write_builtin_fixtures(directory):
    """Write every built-in configuration as ``<name>.json``."""
    import os
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, make in BUILTIN.items():
        path = os.path.join(directory, name + '.json')
        with open(path, 'w') as fh:
            json.dump(make(), fh, indent=1, sort_keys=True)
            fh.write('\n')
        paths.append(path)
    return paths
