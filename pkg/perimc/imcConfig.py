# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to read, normalize and write the YAML config
#  shared by all perimc command line tools.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

import os
import copy
import numpy as np
import yaml

from perimc.errors import ConfigError, CausalityViolation, MissingFile
from perimc.plantmodel import (plant_from_config, plant_to_config,
                               perturb_plant)
from perimc.sigmodel import harmonic_set, harmonic_set_from_list
from perimc.filtersynth import FilterDesignSpec
from perimc.analysis import MismatchSpec, SpectrumRegion

DEFAULT_ANALYSIS = {
    'band_hz': [0.1, 100.0],
    'hinf_band_hz': [0.01, 200.0],
    'points': 2000,
    'rel_tol': 1e-3,
}
DEFAULT_SIMULATION = {
    'h_s': 1e-3,
    't_end_s': 30.0,
    't_on_s': 5.5,
    'compensate_sampling': True,
    'disturbance': {'kind': 'harmonics', 'count': 8},
    'reference': {'kind': 'zero'},
}


def checkFileExist(file):
    if not os.path.exists(os.path.abspath(file)):
        raise MissingFile('%s not found' % file)


def load_config(config_file):
    checkFileExist(config_file)
    with open(config_file, 'r') as stream:
        try:
            cfg = yaml.safe_load(stream)
        except yaml.YAMLError as exc:
            raise ConfigError('cannot parse %s: %s' % (config_file, exc))
    if not isinstance(cfg, dict):
        raise ConfigError('%s does not hold a YAML mapping' % config_file)
    return ToolkitConfig.from_dict(cfg)


def dump_config(cfg, config_file):
    with open(config_file, 'w') as stream:
        yaml.safe_dump(cfg.to_dict(), stream, default_flow_style=None,
                       sort_keys=False)


def _float_pair(value, name):
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError('%s must be a pair of numbers' % name)
    return [lo, hi]


def _aux_list(value, name='aux_poles'):
    """'auto' or a list of numbers / [re, im] pairs -> 'auto' or pairs."""
    if value is None or value == 'auto':
        return 'auto'
    out = []
    for p in value:
        if isinstance(p, (list, tuple)):
            if len(p) != 2:
                raise ConfigError('%s entries must be numbers or [re, im]' % name)
            out.append([float(p[0]), float(p[1])])
        else:
            out.append([float(p), 0.0])
    return out


class ToolkitConfig:
    """Normalized config tree with builders for the pipeline inputs.

    Sections: plant, design, analysis, simulation, output.
    """

    def __init__(self, plant, design, analysis, simulation, output):
        self.plant = plant
        self.design = design
        self.analysis = analysis
        self.simulation = simulation
        self.output = output

    @classmethod
    def from_dict(cls, cfg):
        cfg = copy.deepcopy(cfg)
        if 'plant' not in cfg or 'design' not in cfg:
            raise ConfigError('config needs plant and design sections')
        plant = dict(cfg['plant'])
        p = plant_from_config(plant)
        plant = {'numerator': [float(v) for v in plant['numerator']],
                 'denominator': [float(v) for v in plant['denominator']],
                 'tau_s': float(plant.get('tau_s', 0.0)),
                 'stabilize': bool(plant.get('stabilize', False))}

        d = dict(cfg['design'])
        if ('omega_b_rad_s' in d) == ('period_s' in d):
            raise ConfigError('give exactly one of omega_b_rad_s and period_s')
        omega_b = float(d['omega_b_rad_s']) if 'omega_b_rad_s' in d \
            else 2 * np.pi / float(d['period_s'])
        if 'harmonics' in d and 'frequencies_rad_s' in d:
            raise ConfigError('give either harmonics or frequencies_rad_s')
        design = {'omega_b_rad_s': omega_b}
        if 'frequencies_rad_s' in d:
            design['frequencies_rad_s'] = [float(w) for w in d['frequencies_rad_s']]
            k = len(design['frequencies_rad_s'])
        else:
            design['harmonics'] = int(d.get('harmonics', 1))
            k = design['harmonics']
        n_r = int(d.get('relative_degree', max(1, p.beta - p.alpha)))
        if n_r < p.beta - p.alpha:
            raise CausalityViolation('relative degree %d is below beta - alpha '
                                     '= %d' % (n_r, p.beta - p.alpha),
                                     n_r=n_r, alpha=p.alpha, beta=p.beta)
        design['relative_degree'] = n_r
        if 'Q' in d:
            Q = np.asarray(d['Q'], dtype=float)
            if Q.shape != (2 * k + 1, 2 * k + 1):
                raise ConfigError('Q must be %d x %d' % (2 * k + 1, 2 * k + 1))
            design['Q'] = Q.tolist()
        else:
            design['q_scale'] = float(d.get('q_scale', 1.0))
        design['r'] = float(d.get('r', 1.0))
        design['aux_poles'] = _aux_list(d.get('aux_poles', 'auto'))
        if design['aux_poles'] != 'auto' and len(design['aux_poles']) != n_r - 1:
            raise ConfigError('expected %d auxiliary poles for relative degree '
                              '%d, got %d' % (n_r - 1, n_r,
                                              len(design['aux_poles'])))

        a = dict(DEFAULT_ANALYSIS)
        a.update(cfg.get('analysis') or {})
        analysis = {'band_hz': _float_pair(a['band_hz'], 'band_hz'),
                    'hinf_band_hz': _float_pair(a['hinf_band_hz'], 'hinf_band_hz'),
                    'points': int(a['points']),
                    'rel_tol': float(a['rel_tol'])}
        if a.get('region'):
            reg = a['region']
            analysis['region'] = {key: float(reg[key]) for key in
                                  ('re_min', 're_max', 'im_min', 'im_max', 'step')}
        if a.get('mismatch'):
            m = dict(a['mismatch'])
            if 'plant' in m:
                mp = plant_from_config(m['plant'])
                analysis['mismatch'] = {'plant': plant_to_config(mp)}
            else:
                analysis['mismatch'] = {
                    'gain': float(m.get('gain', 1.0)),
                    'time_constant_s': float(m.get('time_constant_s', 0.0)),
                    'tau_s': None if m.get('tau_s') is None else float(m['tau_s'])}
        if a.get('probe'):
            pr = dict(a['probe'])
            analysis['probe'] = {
                'time_constant_s': float(pr.get('time_constant_s', 0.0)),
                'lo': float(pr.get('lo', 0.5)), 'hi': float(pr.get('hi', 10.0)),
                'tol': float(pr.get('tol', 1e-3))}
            if not 0 < analysis['probe']['lo'] < analysis['probe']['hi']:
                raise ConfigError('probe needs 0 < lo < hi')

        s = dict(DEFAULT_SIMULATION)
        s.update(cfg.get('simulation') or {})
        simulation = {'h_s': float(s['h_s']), 't_end_s': float(s['t_end_s']),
                      't_on_s': float(s['t_on_s']),
                      'compensate_sampling': bool(s['compensate_sampling']),
                      'use_mismatch': bool(s.get('use_mismatch', False)),
                      'disturbance': dict(s['disturbance'] or {'kind': 'zero'}),
                      'reference': dict(s['reference'] or {'kind': 'zero'})}
        if simulation['h_s'] <= 0 or simulation['t_end_s'] <= 0:
            raise ConfigError('h_s and t_end_s must be positive')
        for key in ('window_pre_s', 'window_post_s'):
            if s.get(key):
                simulation[key] = _float_pair(s[key], key)

        o = cfg.get('output') or {}
        output = {'directory': str(o.get('directory', 'perimc_out'))}
        return cls(plant, design, analysis, simulation, output)

    def to_dict(self):
        return copy.deepcopy({'plant': self.plant, 'design': self.design,
                              'analysis': self.analysis,
                              'simulation': self.simulation,
                              'output': self.output})

    def __eq__(self, other):
        return isinstance(other, ToolkitConfig) and self.to_dict() == other.to_dict()

    def plant_model(self):
        return plant_from_config(self.plant)

    def harmonics(self):
        d = self.design
        if 'frequencies_rad_s' in d:
            return harmonic_set_from_list(d['omega_b_rad_s'], d['frequencies_rad_s'])
        return harmonic_set(d['omega_b_rad_s'], d['harmonics'])

    def filter_spec(self):
        d = self.design
        h = self.harmonics()
        Q = np.asarray(d['Q']) if 'Q' in d else d['q_scale'] * np.eye(2 * h.k + 1)
        aux = None if d['aux_poles'] == 'auto' else \
            tuple(complex(re, im) for re, im in d['aux_poles'])
        return FilterDesignSpec(h, d['relative_degree'], Q, d['r'], aux)

    def mismatch(self, model=None):
        """MismatchSpec of the analysis section, or None."""
        m = self.analysis.get('mismatch')
        if not m:
            return None
        model = self.plant_model() if model is None else model
        if 'plant' in m:
            return MismatchSpec(plant_from_config(m['plant']), model)
        return MismatchSpec(perturb_plant(model, m['gain'], m['time_constant_s'],
                                          m['tau_s']), model)

    def region(self):
        """Scan rectangle; by default it holds all targeted harmonics and
        the auxiliary pole cluster."""
        reg = self.analysis.get('region')
        if reg:
            return SpectrumRegion(reg['re_min'], reg['re_max'], reg['im_min'],
                                  reg['im_max'], reg['step'])
        spec = self.filter_spec()
        w_k = max(spec.harmonics.frequencies)
        re_min = min([-10.0] + [1.2 * p.real for p in spec.aux_poles])
        im_max = 2.0 * w_k
        step = min(0.05, (im_max / 20), -re_min / 20)
        return SpectrumRegion(re_min, 5.0, 0.0, im_max, step)
