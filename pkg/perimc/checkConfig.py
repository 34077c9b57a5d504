# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to check a perimc config before a design run:
#  plant admissibility, harmonic set, relative degree and the sampling
#  settings of the simulation section.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

import sys
import argparse

import numpy as np

import perimc
from perimc.errors import PerimcError, EXIT_OK
from perimc.imcConfig import load_config
from perimc.plantmodel import validate_plant, plant_from_config


def checkPlant(cfg):
    """Warning lines for the plant section; the raw (unstabilized) plant
    is checked so that a missing `stabilize: true` is reported."""
    warnings = []
    raw = dict(cfg.plant)
    raw['stabilize'] = False
    report = validate_plant(plant_from_config(raw))
    print('=> Plant: relative degree %d, worst real part %.4g' %
          (report.relative_degree, report.worst_real_part))
    if not report.is_proper:
        warnings.append('plant is improper')
    if not report.denominator_hurwitz:
        if cfg.plant['stabilize']:
            print('   Unstable poles are mirrored (stabilize: true)')
        else:
            warnings.append('denominator has roots with Re >= 0; set '
                            '"stabilize: true" to mirror them')
    if not report.numerator_hurwitz:
        if cfg.plant['stabilize']:
            print('   Non-minimum-phase zeros are mirrored (stabilize: true)')
        else:
            warnings.append('numerator has roots with Re >= 0; the plant '
                            'cannot be inverted')
    if not report.delay_nonnegative:
        warnings.append('plant delay is negative')
    return warnings


def checkDesign(cfg):
    warnings = []
    h = cfg.harmonics()
    spec = cfg.filter_spec()
    print('=> Harmonics: base %.6g rad/s, gammas %s' % (h.base, list(h.gammas)))
    print('   Filter order %d, relative degree %d' % (spec.order, spec.n_r))
    worst = max(p.real for p in spec.aux_poles) if spec.aux_poles else None
    if worst is not None and worst > -1e-3 * h.base:
        warnings.append('auxiliary pole at Re %.4g is very slow against the '
                        'base frequency' % worst)
    return warnings


def checkSimulation(cfg):
    warnings = []
    s = cfg.simulation
    h = cfg.harmonics()
    ratio = h.period / s['h_s']
    print('=> Simulation: h = %g s, %.4g samples per period' % (s['h_s'], ratio))
    if abs(ratio - round(ratio)) > 0.01:
        warnings.append('period is not a whole number of samples; residuals '
                        'cannot be measured')
    if max(h.frequencies) > np.pi / s['h_s']:
        warnings.append('highest harmonic is above the Nyquist frequency')
    if s['t_on_s'] < h.period:
        warnings.append('t_on is shorter than one period; no pre window')
    if s['use_mismatch'] and cfg.mismatch() is None:
        warnings.append('use_mismatch is set without an analysis mismatch')
    return warnings


def cmd_check(configFile):
    cfg = load_config(configFile)
    warnings = checkPlant(cfg)
    warnings += checkDesign(cfg)
    warnings += checkSimulation(cfg)
    for msg in warnings:
        print('\033[92m*** WARNING: %s\033[0m' % msg)
    print('---------------------------------')
    if warnings:
        print('Done! Config is ready to use with caution!')
    else:
        print('Done! Config is ready to use!')
    return warnings


def main(argv=None):
    version = perimc.__version__
    parser = argparse.ArgumentParser(
        description='You are running perimc.check version ' + str(version) + '.')
    parser.add_argument('--version', action='version', version=str(version))
    required = parser.add_argument_group('Required arguments')
    required.add_argument('--config', help='Config file (in yaml format)',
                          action='store', default='', required=True)
    args = parser.parse_args(argv)
    try:
        cmd_check(args.config)
    except PerimcError as exc:
        sys.stderr.write('*** ERROR: %s: %s\n' % (type(exc).__name__,
                                                   exc.message))
        sys.exit(exc.exitCode)
    sys.exit(EXIT_OK)


if __name__ == '__main__':
    main()
