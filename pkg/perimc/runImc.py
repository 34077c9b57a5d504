# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to dispatch `perimc <command> ...` to the
#  command line tools of the package.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

import sys

import perimc
from perimc import (runDesign, runAnalyze, runSpectrum, runSimulate,
                    runBatch, checkConfig)

COMMANDS = {
    'design': runDesign.main,
    'analyze': runAnalyze.main,
    'spectrum': runSpectrum.main,
    'simulate': runSimulate.main,
    'batch': runBatch.main,
    'check': checkConfig.main,
}


def usage():
    return ('You are running perimc version %s.\n'
            'Usage: perimc {%s} [options]\n'
            'Run perimc <command> -h for the options of a command.'
            % (perimc.__version__, '|'.join(COMMANDS)))


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ('-h', '--help'):
        print(usage())
        sys.exit(0)
    if argv[0] == '--version':
        print(perimc.__version__)
        sys.exit(0)
    if argv[0] not in COMMANDS:
        sys.stderr.write('*** ERROR: unknown command %s\n%s\n' %
                         (argv[0], usage()))
        sys.exit(1)
    COMMANDS[argv[0]](argv[1:])


if __name__ == '__main__':
    main()
