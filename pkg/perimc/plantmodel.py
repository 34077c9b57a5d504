# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Plant class G(s) e^{-s tau} with Hurwitz numerator and denominator:
#  validation, frequency response, the inverse-numerator realization
#  used by controller assembly and a simulation realization.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as P
import scipy.linalg as la
import scipy.signal as signal

from perimc.errors import InvalidPlant, PoleHit, VerificationFailed
from perimc.numkernel import (StateSpaceModel, eigenvalues, zoh_discretize,
                              stable_test_points, transfer_mismatch)

HURWITZ_MARGIN = 1e-9
TRANSFER_TOL = 1e-9


def _coefficients(values, name):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidPlant('%s coefficients must be a nonempty list' % name)
    if not np.all(np.isfinite(arr)):
        raise InvalidPlant('%s coefficients must be finite' % name)
    if arr[-1] == 0:
        raise InvalidPlant('leading %s coefficient is zero' % name)
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class DelayedRationalPlant:
    """G(s) e^{-s tau} with ascending coefficient tuples.

    numerator holds a_0..a_alpha, denominator b_0..b_beta.
    """
    numerator: tuple
    denominator: tuple
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'numerator',
                           _coefficients(self.numerator, 'numerator'))
        object.__setattr__(self, 'denominator',
                           _coefficients(self.denominator, 'denominator'))
        tau = float(self.tau)
        if not np.isfinite(tau):
            raise InvalidPlant('delay must be finite')
        object.__setattr__(self, 'tau', tau)

    @property
    def alpha(self):
        return len(self.numerator) - 1

    @property
    def beta(self):
        return len(self.denominator) - 1


@dataclass(frozen=True)
class PlantValidationReport:
    is_proper: bool
    numerator_hurwitz: bool
    denominator_hurwitz: bool
    relative_degree: int
    worst_real_part: float
    delay_nonnegative: bool = True

    @property
    def accepted(self):
        return (self.is_proper and self.numerator_hurwitz and
                self.denominator_hurwitz and self.delay_nonnegative)

    def to_dict(self):
        return {
            'is_proper': self.is_proper,
            'numerator_hurwitz': self.numerator_hurwitz,
            'denominator_hurwitz': self.denominator_hurwitz,
            'relative_degree': self.relative_degree,
            'worst_real_part': self.worst_real_part,
            'delay_nonnegative': self.delay_nonnegative,
            'accepted': self.accepted}


def polynomial_roots(ascending):
    """Roots from the eigenvalues of the companion matrix."""
    desc = np.asarray(ascending, dtype=float)[::-1]
    if desc.size < 2:
        return np.zeros(0, dtype=complex)
    return eigenvalues(la.companion(desc))


def _hurwitz(roots):
    return bool(np.all(roots.real <= -HURWITZ_MARGIN))


def validate_plant(p):
    numRoots = polynomial_roots(p.numerator)
    denRoots = polynomial_roots(p.denominator)
    allRoots = np.concatenate([numRoots, denRoots])
    worst = float(np.max(allRoots.real)) if allRoots.size else float('-inf')
    return PlantValidationReport(
        is_proper=p.beta >= p.alpha,
        numerator_hurwitz=_hurwitz(numRoots),
        denominator_hurwitz=_hurwitz(denRoots),
        relative_degree=max(p.beta - p.alpha, 0),
        worst_real_part=worst,
        delay_nonnegative=p.tau >= 0)


def require_valid(p):
    report = validate_plant(p)
    if not report.accepted:
        failed = [key for key in ('is_proper', 'numerator_hurwitz',
                                  'denominator_hurwitz', 'delay_nonnegative')
                  if not getattr(report, key)]
        raise InvalidPlant('plant rejected: %s' % ', '.join(failed),
                           **report.to_dict())
    return report


def eval_plant(p, s):
    """G(s) e^{-s tau}, Horner evaluated; s may be an array."""
    s = np.asarray(s, dtype=complex)
    den = P.polyval(s, p.denominator)
    if np.any(np.abs(den) < 1e-300):
        raise PoleHit('denominator vanishes at s = %s' % s, s=str(s))
    out = P.polyval(s, p.numerator) / den * np.exp(-s * p.tau)
    return complex(out) if out.ndim == 0 else out


def inverse_numerator_realization(p, seed=0):
    """Controllable canonical realization of 1/(a_alpha s^alpha + ... + a_0)."""
    report = validate_plant(p)
    if not report.numerator_hurwitz:
        raise InvalidPlant('numerator is not Hurwitz, the inverse would be '
                           'unstable', worst_real_part=report.worst_real_part)
    a = np.asarray(p.numerator)
    alpha = p.alpha
    if alpha == 0:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)),
                               np.zeros((1, 0)), 1.0 / a[0])
    A = np.zeros((alpha, alpha))
    A[:-1, 1:] = np.eye(alpha - 1)
    A[-1, :] = -a[:-1] / a[-1]
    B = np.zeros((alpha, 1))
    B[-1, 0] = 1.0
    C = np.zeros((1, alpha))
    C[0, 0] = 1.0 / a[-1]
    model = StateSpaceModel(A, B, C, 0.0)
    scale = max(1.0, float(np.max(np.abs(polynomial_roots(a)))))
    gap = transfer_mismatch(model, lambda s: 1.0 / P.polyval(s, a),
                            stable_test_points(5, scale, seed))
    if gap > TRANSFER_TOL:
        raise VerificationFailed('inverse numerator realization off by %.3e'
                                 % gap, mismatch=gap)
    return model


def denominator_coefficients(p):
    """b_beta..b_0, the descending order used at controller assembly."""
    return np.asarray(p.denominator[::-1])


def numerator_coefficients(p):
    return np.asarray(p.numerator[::-1])


def plant_state_space(p):
    """Balanced controllable canonical realization of the rational part."""
    A, B, C, D = signal.tf2ss(numerator_coefficients(p),
                              denominator_coefficients(p))
    if A.size == 0:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)),
                               np.zeros((1, 0)), float(np.ravel(D)[0]))
    _, (scale, _) = la.matrix_balance(A, permute=False, separate=True)
    A = A * scale[None, :] / scale[:, None]
    B = B / scale[:, None]
    C = C * scale[None, :]
    return StateSpaceModel(A, B, C, float(np.ravel(D)[0]))


def _mirror(ascending):
    lead = ascending[-1]
    roots = polynomial_roots(ascending)
    if roots.size == 0:
        return ascending
    roots = np.where(roots.real > -HURWITZ_MARGIN,
                     -np.abs(roots.real) + 1j * roots.imag, roots)
    desc = lead * np.poly(roots)
    return tuple(np.real(desc[::-1]))


def stabilize_plant(p):
    """Mirror right-half-plane roots into the left half-plane.

    |G(jw)| and the leading coefficients are unchanged; roots exactly on
    the imaginary axis cannot be mirrored and stay where they are.
    """
    return DelayedRationalPlant(_mirror(p.numerator), _mirror(p.denominator),
                                p.tau)


def perturb_plant(p, gain, time_constant, tau=None):
    """G(s) gain / (time_constant s + 1), optionally with another delay."""
    num = tuple(gain * np.asarray(p.numerator))
    den = tuple(P.polymul(p.denominator, [1.0, time_constant])) \
        if time_constant else p.denominator
    return DelayedRationalPlant(num, den, p.tau if tau is None else tau)


def plant_step_response(p, h, T_end):
    """ZOH-exact unit step response of G(s) e^{-s tau} at t = 0, h, ..."""
    model = plant_state_space(p)
    n = int(round(T_end / h)) + 1
    t = np.arange(n) * h
    delay = int(round(p.tau / h))
    u = (np.arange(n) >= delay).astype(float)
    if model.order == 0:
        return t, model.D * u
    Ad, Bd = zoh_discretize(model.A, model.B, h)
    _, y, _ = signal.dlsim((Ad, Bd, model.C, np.array([[model.D]]), h), u)
    return t, np.ravel(y)


def plant_from_config(section):
    """Plant from a config section with ascending `numerator` and
    `denominator` lists, `tau_s` and an optional `stabilize` flag."""
    try:
        p = DelayedRationalPlant(tuple(section['numerator']),
                                 tuple(section['denominator']),
                                 section.get('tau_s', 0.0))
    except KeyError as exc:
        raise InvalidPlant('plant section is missing %s' % exc)
    except TypeError:
        raise InvalidPlant('plant coefficients must be lists of numbers')
    if section.get('stabilize', False):
        p = stabilize_plant(p)
    return p


def plant_to_config(p):
    return {'numerator': [float(v) for v in p.numerator],
            'denominator': [float(v) for v in p.denominator],
            'tau_s': float(p.tau)}
