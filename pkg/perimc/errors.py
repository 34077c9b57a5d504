# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Exception classes shared by all perimc modules. Validation problems
#  (bad plant, bad config) and numerical failures map to different exit
#  codes of the command line tools.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class PerimcError(Exception):
    exitCode = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        return {
            'error': type(self).__name__,
            'message': self.message,
            'exit_code': self.exitCode,
            'details': self.details}


class ValidationError(PerimcError):
    exitCode = EXIT_VALIDATION


class NumericalError(PerimcError):
    exitCode = EXIT_NUMERICAL


# validation failures
class InvalidPlant(ValidationError):
    pass


class CausalityViolation(ValidationError):
    pass


class CommensurabilityError(ValidationError):
    pass


class UnstableAuxiliaryPole(ValidationError):
    pass


class NyquistViolation(ValidationError):
    pass


class NonIntegerPeriod(ValidationError):
    pass


class NonFiniteInput(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class MissingFile(ValidationError):
    pass


# numerical failures
class SingularMatrix(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NotStabilizable(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


class StackedSystemSingular(NumericalError):
    pass


class RealizationNotCanonical(NumericalError):
    pass


class PoleHit(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class UnstableSimulation(NumericalError):
    pass


class VerificationFailed(NumericalError):
    pass
