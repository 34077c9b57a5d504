# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  This script is used to run perimc design (and optionally analyze)
#  for every config file in a folder. Every config gets its own output
#  subfolder named after the file.
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
from pathlib import Path

from tqdm import tqdm

import perimc
from perimc.errors import PerimcError, MissingFile, EXIT_OK
from perimc.imcConfig import load_config
from perimc.runDesign import cmd_design
from perimc.runAnalyze import cmd_analyze
from perimc.runLog import write_json


def getConfigFiles(folder):
    """*.yml and *.yaml files of a folder, largest first."""
    pairs = []
    for file in os.listdir(folder):
        location = os.path.join(folder, file)
        if os.path.isfile(location) and file.endswith(('.yml', '.yaml')):
            pairs.append((os.path.getsize(location), file))
    pairs.sort(key=lambda s: s[0], reverse=True)
    return [x[1] for x in pairs]


def getJobName(configFile):
    return os.path.splitext(os.path.basename(configFile))[0]


def batchJob(args):
    """(configFile, outpath, analyze) -> (name, exit code, runtime, error)."""
    configFile, outpath, analyze = args
    name = getJobName(configFile)
    jobOut = os.path.join(outpath, name)
    start = time.time()
    try:
        cfg = load_config(configFile)
        code = cmd_design(cfg, jobOut)
        if analyze and code == EXIT_OK:
            code = cmd_analyze(cfg, os.path.join(jobOut, 'controller.json'),
                               jobOut)
        error = None
    except PerimcError as exc:
        Path(jobOut).mkdir(parents=True, exist_ok=True)
        write_json(os.path.join(jobOut, 'design_error.json'), exc.to_dict())
        code, error = exc.exitCode, '%s: %s' % (type(exc).__name__, exc.message)
    return name, code, '{:5.3f}'.format(time.time() - start), error


def cmd_batch(folder, outpath, cpu=4, analyze=False, silent=True):
    """Returns the list of (name, code, runtime, error) in config order."""
    if not os.path.isdir(folder):
        raise MissingFile('%s is not a folder' % folder)
    configs = getConfigFiles(folder)
    Path(outpath).mkdir(parents=True, exist_ok=True)
    print('Running %d configs...' % len(configs))
    start = time.time()
    jobs = [(os.path.join(folder, f), outpath, analyze) for f in configs]
    results = []
    if jobs:
        pool = mp.Pool(min(cpu, len(jobs)))
        for _ in tqdm(pool.imap_unordered(batchJob, jobs), total=len(jobs),
                      disable=silent):
            results.append(_)
        pool.close()
        pool.join()
    order = {getJobName(f): i for i, f in enumerate(configs)}
    results.sort(key=lambda r: order[r[0]])

    with open(os.path.join(outpath, 'runtime_design.txt'), 'w') as log:
        for name, code, runtime, _ in results:
            log.write('%s\t%s\t%d\n' % (name, runtime, code))
    failed = [r for r in results if r[1] != EXIT_OK]
    failedFile = os.path.join(outpath, 'failed.txt')
    if failed:
        with open(failedFile, 'w') as out:
            for name, code, _, error in failed:
                out.write('%s\t%d\t%s\n' % (name, code, error or
                                            'verification failed'))
    elif os.path.exists(failedFile):
        os.remove(failedFile)
    print('==> Batch finished in %s sec' % '{:5.3f}'.format(time.time() - start))
    print('---------------------------------')
    if failed:
        print('Done! %d of %d configs failed, see %s' %
              (len(failed), len(results), failedFile))
    else:
        print('Done! Results are ready to use!')
    return results


def main(argv=None):
    version = perimc.__version__
    parser = argparse.ArgumentParser(
        description='You are running perimc.batch version ' + str(version) + '.')
    parser.add_argument('--version', action='version', version=str(version))
    required = parser.add_argument_group('Required arguments')
    required.add_argument('--input', help='Folder with config files',
                          action='store', default='', required=True)
    optional = parser.add_argument_group('Other options')
    optional.add_argument('--out', help='Output directory', action='store',
                          default='perimc_batch')
    optional.add_argument('--cpu', help='Number of CPUs. Default: 4',
                          action='store', default=4, type=int)
    optional.add_argument('--analyze', help='Also run perimc analyze',
                          action='store_true', default=False)
    optional.add_argument('--silentOff', help='Show progress bar',
                          action='store_true', default=False)
    args = parser.parse_args(argv)
    try:
        results = cmd_batch(args.input, args.out, args.cpu, args.analyze,
                            not args.silentOff)
    except PerimcError as exc:
        sys.stderr.write('*** ERROR: %s\n' % exc.message)
        sys.exit(exc.exitCode)
    sys.exit(EXIT_OK if all(r[1] == EXIT_OK for r in results) else 1)


if __name__ == '__main__':
    main()
