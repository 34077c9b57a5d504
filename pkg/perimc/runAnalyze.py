# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to sweep the ideal and perturbed sensitivity of
#  a designed controller and to write the robustness report.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

import sys
import os
import time
import argparse

import numpy as np

import perimc
from perimc.imcConfig import load_config
from perimc.imcassembly import load_controller
from perimc.analysis import (ideal_sensitivity, perturbed_sensitivity,
                             hinf_grid, small_gain_check, write_sweep_csv)
from perimc.runLog import (RunLog, run_guarded, write_json,
                           add_common_arguments, resolve_outpath,
                           resolve_controller)

HINF_LIMIT = 2.0


def cmd_analyze(cfg, controllerFile, outpath, silent=True):
    with RunLog(outpath, 'analyze', silent) as log:
        return _analyze(cfg, controllerFile, outpath, log)


def _analyze(cfg, controllerFile, outpath, log):
    c = load_controller(controllerFile)
    f, tau = c.filter, c.plant.tau
    a = cfg.analysis
    lo, hi = a['band_hz']
    omega = 2 * np.pi * np.logspace(np.log10(lo), np.log10(hi), a['points'])

    start = time.time()
    S = ideal_sensitivity(f, tau, c.theta, omega)
    columns = {'omega_rad_s': omega, 'f_hz': omega / (2 * np.pi),
               'ideal_mag': np.abs(S), 'ideal_phase_rad': np.angle(S)}
    harmonics = np.asarray(f.harmonics.frequencies)
    notches = np.abs(ideal_sensitivity(f, tau, c.theta, harmonics))
    band = 2 * np.pi * np.asarray(a['hinf_band_hz'])
    hinf, hinfAt = hinf_grid(lambda w: ideal_sensitivity(f, tau, c.theta, w),
                             band, a['rel_tol'], a['points'])
    log.timed('Ideal sensitivity', start)
    report = {'version': perimc.__version__,
              'ideal': {'hinf': hinf, 'hinf_omega_rad_s': hinfAt,
                        'harmonic_magnitudes': notches.tolist(),
                        'max_harmonic_magnitude': float(np.max(notches)),
                        'hinf_limit': HINF_LIMIT,
                        'hinf_below_limit': bool(hinf < HINF_LIMIT)}}
    if hinf >= HINF_LIMIT:
        log.warn('ideal sensitivity peak %.4g is not below %g' %
                 (hinf, HINF_LIMIT))

    m = cfg.mismatch(c.plant)
    if m is not None:
        start = time.time()
        Sp, flags = perturbed_sensitivity(c, m, omega, with_flags=True)
        columns['perturbed_mag'] = np.abs(Sp)
        columns['perturbed_phase_rad'] = np.angle(Sp)
        pNotches = np.abs(perturbed_sensitivity(c, m, harmonics))
        pHinf, pHinfAt = hinf_grid(lambda w: perturbed_sensitivity(c, m, w),
                                   band, a['rel_tol'], a['points'])
        margin, passed = small_gain_check(c, m, band, a['rel_tol'])
        log.timed('Perturbed sensitivity', start)
        report['perturbed'] = {
            'hinf': pHinf, 'hinf_omega_rad_s': pHinfAt,
            'harmonic_magnitudes': pNotches.tolist(),
            'denominator_near_zero': bool(np.any(flags)),
            'small_gain_margin': margin, 'small_gain_pass': passed}
        if np.any(flags):
            log.warn('loop denominator nearly vanishes at %d sweep points'
                     % int(np.sum(flags)))
        if not passed:
            log.warn('small-gain margin %.4g >= 1; the test is only '
                     'sufficient, check the pole spectrum' % margin)

    write_sweep_csv(os.path.join(outpath, 'sensitivity.csv'), columns)
    write_json(os.path.join(outpath, 'analysis_report.json'), report)
    log.write('Ideal |S| peak %.4g at %.4g rad/s' % (hinf, hinfAt))
    return 0


def main(argv=None):
    version = perimc.__version__
    parser = argparse.ArgumentParser(
        description='You are running perimc.analyze version ' + str(version) + '.')
    parser.add_argument('--version', action='version', version=str(version))
    add_common_arguments(parser)
    args = parser.parse_args(argv)
    outpath = resolve_outpath(args.out, args.config)

    def run():
        cfg = load_config(args.config)
        return cmd_analyze(cfg, resolve_controller(args.controller, outpath),
                           outpath, not args.silentOff)

    sys.exit(run_guarded('analyze', outpath, run, args.debug))


if __name__ == '__main__':
    main()
