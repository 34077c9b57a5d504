# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to run the sampled IMC loop of a designed
#  controller and to measure how much of every targeted harmonic is
#  left in the output after the controller is switched on.
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
from perimc.errors import UnstableSimulation
from perimc.imcConfig import load_config
from perimc.imcassembly import load_controller
from perimc.sim import (simulate_imc, signal_from_config, harmonic_residuals,
                        attenuation_db, write_trace_csv)
from perimc.runLog import (RunLog, run_guarded, write_json,
                           add_common_arguments, resolve_outpath,
                           resolve_controller)

MIN_ATTENUATION_DB = 40.0
MAX_WINDOW_PERIODS = 10


def default_windows(T, t_on, t_end):
    """Whole periods right before t_on and at the end of the run, at most
    ten of each. The pre window is None if t_on is shorter than T."""
    nPre = min(MAX_WINDOW_PERIODS, int(np.floor(t_on / T + 1e-9)))
    pre = [t_on - nPre * T, t_on] if nPre >= 1 else None
    nPost = min(MAX_WINDOW_PERIODS, int(np.floor((t_end - t_on) / T + 1e-9)))
    post = [t_end - nPost * T, t_end] if nPost >= 1 else None
    return pre, post


def cmd_simulate(cfg, controllerFile, outpath, silent=True):
    with RunLog(outpath, 'simulate', silent) as log:
        return _simulate(cfg, controllerFile, outpath, log)


def _simulate(cfg, controllerFile, outpath, log):
    c = load_controller(controllerFile)
    s = cfg.simulation
    h, T_end, t_on = s['h_s'], s['t_end_s'], s['t_on_s']
    omega_b = c.filter.harmonics.base
    model = c.plant
    plantTrue = model
    if s['use_mismatch']:
        m = cfg.mismatch(model)
        if m is None:
            log.warn('use_mismatch is set but the analysis section has no '
                     'mismatch; simulating the nominal plant')
        else:
            plantTrue = m.plant

    d = signal_from_config(s['disturbance'], h, T_end, omega_b)
    r = signal_from_config(s['reference'], h, T_end, omega_b)
    start = time.time()
    try:
        tr = simulate_imc(plantTrue, model, c, r, d, h, T_end, t_on,
                          compensate_sampling=s['compensate_sampling'],
                          progress=not log.silent)
    except UnstableSimulation as exc:
        partialFile = os.path.join(outpath, 'trace_partial.csv')
        write_trace_csv(partialFile, exc.trace)
        exc.details['partial_trace'] = partialFile
        raise
    log.timed('Simulation', start)
    traceFile = os.path.join(outpath, 'trace.csv')
    write_trace_csv(traceFile, tr)

    hs = c.filter.harmonics
    T = hs.period
    pre, post = default_windows(T, t_on, tr.N * h)
    pre = s.get('window_pre_s', pre)
    post = s.get('window_post_s', post)
    report = {'version': perimc.__version__,
              'samples': tr.N,
              'nominal_plant': plantTrue is model,
              'delays': tr.report,
              'window_pre_s': pre,
              'window_post_s': post}
    if post is None:
        log.warn('run ends less than one period after t_on; no residuals')
    else:
        L = max(hs.gammas)
        after = harmonic_residuals(tr, T, L, post)
        rows = []
        for g, w in zip(hs.gammas, hs.frequencies):
            rows.append({'gamma': g, 'omega_rad_s': w,
                         'post': float(after[g - 1])})
        if pre is None:
            log.warn('t_on is shorter than one period; no attenuation')
        else:
            before = harmonic_residuals(tr, T, L, pre)
            db = attenuation_db([before[g - 1] for g in hs.gammas],
                                [after[g - 1] for g in hs.gammas])
            for row, g, value in zip(rows, hs.gammas, db):
                row['pre'] = float(before[g - 1])
                row['attenuation_db'] = float(value)
            report['min_attenuation_db'] = float(np.min(db))
            if np.min(db) < MIN_ATTENUATION_DB:
                log.warn('weakest harmonic is only attenuated by %.1f dB'
                         % np.min(db))
        report['harmonics'] = rows
        log.write('Post-window residuals: %s' %
                  ', '.join('%.3e' % row['post'] for row in rows))

    write_json(os.path.join(outpath, 'simulation_report.json'), report)
    log.write('Trace written to %s' % traceFile)
    return 0


def main(argv=None):
    version = perimc.__version__
    parser = argparse.ArgumentParser(
        description='You are running perimc.simulate version ' + str(version) + '.')
    parser.add_argument('--version', action='version', version=str(version))
    add_common_arguments(parser)
    args = parser.parse_args(argv)
    outpath = resolve_outpath(args.out, args.config)

    def run():
        cfg = load_config(args.config)
        return cmd_simulate(cfg, resolve_controller(args.controller, outpath),
                            outpath, not args.silentOff)

    sys.exit(run_guarded('simulate', outpath, run, args.debug))


if __name__ == '__main__':
    main()
