#!/bin/env python

#######################################################################
#  Copyright (C) 2026 perimc authors
#
#  perimc is the python package for internal model control of periodic
#  disturbances on delayed plants. perimc is a free software: you can
#  redistribute it and/or modify it under the terms of the GNU General
#  Public License as published by the Free Software Foundation, either
#  version 3 of the License, or (at your option) any later version.
#
#  perimc is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with perimc.  If not, see <http://www.gnu.org/licenses/>.
#
#######################################################################

from setuptools import setup, find_packages

with open("README.md", "r") as input:
    long_description = input.read()

setup(
    name="perimc",
    version="0.1.0",
    python_requires='>=3.8.0',
    description="Internal model control for periodic disturbance rejection "
                "on delayed plants",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="perimc authors",
    packages=find_packages(exclude=['tests']),
    package_data={'perimc': ['data/*.yml']},
    install_requires=[
        'numpy',
        'scipy',
        'tqdm',
        'PyYAML'
    ],
    extras_require={
        'test': ['pytest']
    },
    entry_points={
        'console_scripts': ["perimc = perimc.runImc:main",
                            "perimc.design = perimc.runDesign:main",
                            "perimc.analyze = perimc.runAnalyze:main",
                            "perimc.spectrum = perimc.runSpectrum:main",
                            "perimc.simulate = perimc.runSimulate:main",
                            "perimc.check = perimc.checkConfig:main",
                            "perimc.batch = perimc.runBatch:main"],
    },
    license="GPL-3.0",
    classifiers=[
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
    ],
)
