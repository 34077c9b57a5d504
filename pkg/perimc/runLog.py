# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used by all perimc command line tools to print and
#  log their progress, write JSON reports and turn errors into exit
#  codes.
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
import json
import time
import traceback
from pathlib import Path

import numpy as np
from tqdm import tqdm

from perimc.errors import PerimcError, EXIT_OK


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def write_json(path, data):
    with open(path, 'w') as out:
        json.dump(data, out, indent=2, default=_jsonable)


class RunLog:
    """Progress lines on stdout mirrored into <outpath>/<command>_log.txt.

    Used as a context manager: a clean exit writes the Done lines, an
    exception writes the error into the log. The file is closed either way.
    """

    def __init__(self, outpath, command, silent=True):
        Path(outpath).mkdir(parents=True, exist_ok=True)
        self.command = command
        self.silent = silent
        self.caution = 0
        self.start = time.time()
        self.log = open(os.path.join(outpath, command + '_log.txt'), 'w')
        self.write('PID ' + str(os.getpid()))

    def __enter__(self):
        return self

    def __exit__(self, excType, exc, tb):
        if excType is None:
            self.close()
        elif not self.log.closed:
            message = exc.message if isinstance(exc, PerimcError) else str(exc)
            self.log.write('*** ERROR: %s: %s\n' % (excType.__name__, message))
            self.log.close()
        return False

    def write(self, msg):
        print(msg)
        self.log.write(msg + '\n')
        self.log.flush()

    def progress(self, iterable, total=None):
        """tqdm bar, hidden unless the command runs with --silentOff."""
        return tqdm(iterable, total=total, disable=self.silent)

    def timed(self, label, start):
        elapsed = '{:5.3f}'.format(time.time() - start)
        self.write('==> %s finished in %s sec' % (label, elapsed))
        return elapsed

    def warn(self, msg):
        print('\033[92m*** WARNING: %s\033[0m' % msg)
        self.log.write('*** WARNING: %s\n' % msg)
        self.caution = 1

    def close(self):
        if self.log.closed:
            return
        self.timed('perimc.' + self.command, self.start)
        self.write('---------------------------------')
        if self.caution == 1:
            self.write('Done! Results are ready to use with caution!')
        else:
            self.write('Done! Results are ready to use!')
        self.log.close()


def run_guarded(command, outpath, fn, debug=False):
    """Run fn(); map a PerimcError to its exit code and an error JSON."""
    try:
        code = fn()
        return EXIT_OK if code is None else code
    except PerimcError as exc:
        sys.stderr.write('*** ERROR: %s: %s\n' % (type(exc).__name__,
                                                   exc.message))
        if debug:
            traceback.print_exc()
        Path(outpath).mkdir(parents=True, exist_ok=True)
        write_json(os.path.join(outpath, command + '_error.json'),
                   exc.to_dict())
        return exc.exitCode


def add_common_arguments(parser, controller=True):
    """--config/--controller/--out/--seed/--cpu/--silentOff/--debug."""
    required = parser.add_argument_group('Required arguments')
    required.add_argument('--config', help='Config file (in yaml format)',
                          action='store', default='', required=True)
    optional = parser.add_argument_group('Other options')
    if controller:
        optional.add_argument('--controller',
                              help='Controller file written by perimc design. '
                                   'Default: <out>/controller.json',
                              action='store', default='')
    optional.add_argument('--out', help='Output directory. Default: the '
                                        'directory given in the config',
                          action='store', default='')
    optional.add_argument('--seed', help='Seed for randomized self-checks',
                          action='store', default=0, type=int)
    optional.add_argument('--cpu', help='Number of CPUs used for '
                                        'independent scans. Default: 4',
                          action='store', default=4, type=int)
    optional.add_argument('--silentOff', help='Show progress bars',
                          action='store_true', default=False)
    optional.add_argument('--debug', help='Print tracebacks on failure',
                          action='store_true', default=False)
    return parser


def resolve_outpath(out, configFile):
    """--out if given, else the config's output directory, else '.'."""
    if out:
        return out
    from perimc.imcConfig import load_config
    try:
        return load_config(configFile).output['directory']
    except PerimcError:
        return '.'


def resolve_controller(controller, outpath):
    return controller or os.path.join(outpath, 'controller.json')
