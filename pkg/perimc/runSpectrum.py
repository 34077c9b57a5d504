# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to compute the pole-zero spectrum of the ideal
#  sensitivity and the poles of the perturbed loop of a designed
#  controller. Independent scans run in a process pool.
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
import multiprocessing as mp

import numpy as np

import perimc
from perimc.errors import GridTooCoarse
from perimc.imcConfig import load_config
from perimc.imcassembly import load_controller
from perimc.analysis import (ideal_zero_polynomial, ideal_poles,
                             perturbed_char_polynomial, qp_roots,
                             spectral_abscissa, critical_mismatch_gain,
                             write_roots_csv)
from perimc.runLog import (RunLog, run_guarded, write_json,
                           add_common_arguments, resolve_outpath,
                           resolve_controller)


def scanJob(args):
    """(kind, quasi-polynomial, region) -> (kind, roots, expected, found, error)."""
    kind, q, region = args
    try:
        scan = qp_roots(q, region)
        return kind, scan.roots, scan.expected, scan.found, None
    except GridTooCoarse as exc:
        return kind, np.zeros(0, dtype=complex), exc.details.get('expected'), \
            exc.details.get('found'), exc.message


def cmd_spectrum(cfg, controllerFile, outpath, cpu=4, silent=True):
    with RunLog(outpath, 'spectrum', silent) as log:
        return _spectrum(cfg, controllerFile, outpath, cpu, log)


def _spectrum(cfg, controllerFile, outpath, cpu, log):
    c = load_controller(controllerFile)
    f = c.filter
    region = cfg.region()
    jobs = [('ideal_zero', ideal_zero_polynomial(f, c.plant.tau, c.theta),
             region)]
    m = cfg.mismatch(c.plant)
    if m is not None:
        jobs.append(('perturbed_pole', perturbed_char_polynomial(c, m), region))

    start = time.time()
    results = []
    pool = mp.Pool(min(cpu, len(jobs)))
    for _ in log.progress(pool.imap_unordered(scanJob, jobs), total=len(jobs)):
        results.append(_)
    pool.close()
    pool.join()
    log.timed('Spectrum scan', start)

    failed = [r for r in results if r[4] is not None]
    if failed:
        kind, _, expected, found, msg = failed[0]
        raise GridTooCoarse('%s scan: %s' % (kind, msg), kind=kind,
                            expected=expected, found=found,
                            suggested_step=region.step / 2)

    rows = [('ideal_pole', r) for r in ideal_poles(f)]
    report = {'version': perimc.__version__,
              'region': vars(region),
              'ideal_pole_count': len(rows)}
    for kind, roots, expected, found, _ in sorted(results, key=lambda r: r[0]):
        rows.extend((kind, r) for r in roots)
        report[kind] = {'count': int(found), 'argument_principle': int(expected),
                        'spectral_abscissa': spectral_abscissa(roots)}
        if kind == 'ideal_zero':
            harmonics = np.asarray(f.harmonics.frequencies)
            gaps = [float(np.min(np.abs(roots - 1j * w))) if roots.size else
                    float('inf') for w in harmonics]
            report[kind]['harmonic_zero_distance'] = gaps
            if max(gaps, default=0.0) > 1e-6:
                log.warn('not every targeted harmonic shows up as a zero '
                         '(worst distance %.3e)' % max(gaps))
        if kind == 'perturbed_pole' and spectral_abscissa(roots) >= 0:
            log.warn('perturbed loop has a root with Re >= 0 (%.4g)'
                     % spectral_abscissa(roots))

    probe = cfg.analysis.get('probe')
    if probe:
        start = time.time()
        gain = critical_mismatch_gain(c, c.plant, probe['time_constant_s'],
                                      region, probe['lo'], probe['hi'],
                                      probe['tol'])
        report['critical_mismatch_gain'] = gain
        log.timed('Critical gain bisection', start)
        log.write('Loop loses stability at mismatch gain %.4g' % gain)

    write_roots_csv(os.path.join(outpath, 'roots.csv'), rows)
    write_json(os.path.join(outpath, 'spectrum_report.json'), report)
    return 0


def main(argv=None):
    version = perimc.__version__
    parser = argparse.ArgumentParser(
        description='You are running perimc.spectrum version ' + str(version) + '.')
    parser.add_argument('--version', action='version', version=str(version))
    add_common_arguments(parser)
    args = parser.parse_args(argv)
    outpath = resolve_outpath(args.out, args.config)

    def run():
        cfg = load_config(args.config)
        return cmd_spectrum(cfg, resolve_controller(args.controller, outpath),
                            outpath, args.cpu, not args.silentOff)

    sys.exit(run_guarded('spectrum', outpath, run, args.debug))


if __name__ == '__main__':
    main()
