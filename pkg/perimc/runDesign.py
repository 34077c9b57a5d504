# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to design the filter and the IMC controller for
#  one config file and to write the controller and its design report.
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

import perimc
from perimc.errors import EXIT_OK, EXIT_NUMERICAL
from perimc.imcConfig import load_config
from perimc.plantmodel import validate_plant
from perimc.filtersynth import build_filter
from perimc.imcassembly import (controller_delay, assemble_controller,
                                controller_poles, save_controller)
from perimc.numkernel import eigenvalues
from perimc.runLog import (RunLog, run_guarded, write_json,
                           add_common_arguments, resolve_outpath)


def _pole_table(values):
    return [[float(v.real), float(v.imag)] for v in values]


def cmd_design(cfg, outpath, seed=0, silent=True):
    """Synthesize filter and controller; exit code 0 iff the filter
    verification passes."""
    with RunLog(outpath, 'design', silent) as log:
        return _design(cfg, outpath, seed, log)


def _design(cfg, outpath, seed, log):
    plant = cfg.plant_model()
    validation = validate_plant(plant)
    spec = cfg.filter_spec()

    start = time.time()
    f = build_filter(spec)
    log.timed('Filter synthesis', start)
    start = time.time()
    theta, l_b = controller_delay(plant.tau, spec.harmonics.base)
    c = assemble_controller(f, plant, theta, seed)
    log.timed('Controller assembly', start)

    controllerFile = os.path.join(outpath, 'controller.json')
    save_controller(c, controllerFile)
    report = {
        'version': perimc.__version__,
        'plant': validation.to_dict(),
        'harmonics_rad_s': list(spec.harmonics.frequencies),
        'filter_order': f.n,
        'controller_order': c.order,
        'relative_degree': f.n_r,
        'theta_s': c.theta,
        'l_b': l_b,
        'D_Q': c.D,
        'stacked_condition': f.condition,
        'verification': f.report.to_dict(),
        'transfer_check': c.transfer_check,
        'transfer_check_passed': c.transfer_check_passed,
        'aux_poles': _pole_table(spec.aux_poles),
        'filter_poles': _pole_table(eigenvalues(f.A)),
        'controller_poles': _pole_table(controller_poles(c)),
        'provenance': c.provenance}
    write_json(os.path.join(outpath, 'design_report.json'), report)
    log.write('Filter order %d, controller order %d, theta = %.6g s (l_b = %d)'
              % (f.n, c.order, c.theta, l_b))
    log.write('Controller written to %s' % controllerFile)
    if f.condition > 1e12:
        log.warn('stacked input-matrix system is ill-conditioned (%.3e)'
                 % f.condition)
    if not c.transfer_check_passed:
        log.warn('controller realization differs from F(s)/G(s) by %.3e'
                 % c.transfer_check)
    code = EXIT_OK
    if not f.report.passed:
        log.warn('filter verification failed: %s' % f.report.to_dict())
        code = EXIT_NUMERICAL
    return code


def main(argv=None):
    version = perimc.__version__
    parser = argparse.ArgumentParser(
        description='You are running perimc.design version ' + str(version) + '.')
    parser.add_argument('--version', action='version', version=str(version))
    add_common_arguments(parser, controller=False)
    args = parser.parse_args(argv)
    outpath = resolve_outpath(args.out, args.config)

    def run():
        cfg = load_config(args.config)
        return cmd_design(cfg, outpath, args.seed, not args.silentOff)

    sys.exit(run_guarded('design', outpath, run, args.debug))


if __name__ == '__main__':
    main()
