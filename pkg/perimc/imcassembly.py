# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Controller delay and state-space assembly of the IMC controller
#  Q(s) e^{-s theta} = F(s) b(s)/a(s) e^{-s theta}, plus the JSON export
#  shared by the command line tools.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

import json
import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import numpy.polynomial.polynomial as P

from perimc.errors import (CausalityViolation, VerificationFailed,
                           MissingFile, ConfigError, InvalidPlant)
from perimc.numkernel import (StateSpaceModel, eigenvalues, is_hurwitz,
                              resolvent, stable_test_points)
from perimc.plantmodel import (require_valid, inverse_numerator_realization,
                               denominator_coefficients, plant_to_config,
                               plant_from_config)
from perimc.sigmodel import HarmonicSet
from perimc.filtersynth import FilterRealization, build_filter, verify_filter

TRANSFER_CHECK_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class ImcController:
    """Q(s) e^{-s theta} as (A_Q, B_Q, C_Q, D_Q) and theta.

    filter and plant are the design inputs; transfer_check is the largest
    relative gap between the realization and F(s) b(s)/a(s) at random
    stable points.
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    theta: float
    l_b: int
    filter: FilterRealization
    plant: object
    transfer_check: float = 0.0
    provenance: str = ''

    @property
    def order(self):
        return self.A.shape[0]

    @property
    def model(self):
        return StateSpaceModel(self.A, self.B, self.C, self.D)

    @property
    def transfer_check_passed(self):
        return self.transfer_check <= TRANSFER_CHECK_TOL


def controller_delay(tau, omega_b):
    """theta = 2 pi l_b / w_b - tau with l_b = floor(tau w_b / 2 pi) + 1."""
    if tau < 0:
        raise InvalidPlant('delay must be nonnegative, got %s' % tau)
    if not omega_b > 0:
        raise ValueError('base frequency must be positive, got %s' % omega_b)
    l_b = int(np.floor(tau * omega_b / (2 * np.pi))) + 1
    theta = 2 * np.pi * l_b / omega_b - tau
    return theta, l_b


def _provenance(f, p):
    blob = json.dumps({'A': f.A.tolist(), 'B': f.B.ravel().tolist(),
                       'plant': plant_to_config(p)}, sort_keys=True)
    return hashlib.sha256(blob.encode('utf-8')).hexdigest()


def assemble_controller(f, p, theta, seed=0):
    """Series F(s) -> 1/a(s), then the derivative stack of b(s).

    C_Q = sum_j b_j C~ A~^j and D_Q = b_beta C~ A~^(beta-1) B~; the
    Markov parameters of F(s)/a(s) vanish up to beta - 2 once
    n_r >= beta - alpha.
    """
    require_valid(p)
    if f.n_r < p.beta - p.alpha:
        raise CausalityViolation('relative degree %d is below beta - alpha = %d'
                                 % (f.n_r, p.beta - p.alpha),
                                 n_r=f.n_r, alpha=p.alpha, beta=p.beta)
    if theta < 0:
        raise ValueError('controller delay must be nonnegative, got %s' % theta)
    inv = inverse_numerator_realization(p, seed)
    n, alpha = f.n, p.alpha
    At = np.zeros((n + alpha, n + alpha))
    At[:n, :n] = f.A
    At[n:, :n] = -inv.B @ f.C
    At[n:, n:] = inv.A
    Bt = np.vstack([f.B, np.zeros((alpha, 1))])
    Ct = np.hstack([-inv.D * f.C, inv.C])
    b = denominator_coefficients(p)
    # Horner over the descending b_beta..b_0
    C_Q = b[0] * Ct
    for bj in b[1:]:
        C_Q = C_Q @ At + bj * Ct
    # C~ A~^(beta-1) B~ is a structural zero unless n_r + alpha == beta
    if p.beta == 0 or f.n_r + alpha > p.beta:
        D_Q = 0.0
    else:
        D_Q = float(b[0] * (Ct @ np.linalg.matrix_power(At, p.beta - 1) @ Bt)[0, 0])
    if not is_hurwitz(At):
        raise VerificationFailed('controller dynamic matrix is not Hurwitz')
    model = StateSpaceModel(At, Bt, C_Q, D_Q)
    scale = max(1.0, float(np.max(np.abs(eigenvalues(At)))))
    worst = 0.0
    for s in stable_test_points(5, scale, seed):
        ref = f.model.response(s) * P.polyval(s, p.denominator) / \
            P.polyval(s, p.numerator)
        worst = max(worst, abs(model.response(s) - ref) / max(abs(ref), 1e-300))
    l_b = int(round(f.harmonics.base * (p.tau + theta) / (2 * np.pi)))
    return ImcController(At, Bt, C_Q, D_Q, float(theta), l_b, f, p,
                         float(worst), _provenance(f, p))


def design_controller(spec, plant, seed=0):
    """Filter synthesis, controller delay and assembly in one call."""
    require_valid(plant)
    if spec.n_r < plant.beta - plant.alpha:
        raise CausalityViolation('relative degree %d is below beta - alpha = %d'
                                 % (spec.n_r, plant.beta - plant.alpha),
                                 n_r=spec.n_r, alpha=plant.alpha,
                                 beta=plant.beta)
    f = build_filter(spec)
    theta, _ = controller_delay(plant.tau, spec.harmonics.base)
    return f, assemble_controller(f, plant, theta, seed)


def build_controller(f, plant, seed=0):
    """assemble_controller with theta taken from controller_delay."""
    theta, _ = controller_delay(plant.tau, f.harmonics.base)
    return assemble_controller(f, plant, theta, seed)


def controller_response(c, omega):
    """(C_Q (jwI - A_Q)^-1 B_Q + D_Q) e^{-jw theta}."""
    omega = np.asarray(omega, dtype=float)
    out = np.array([((c.C @ resolvent(c.A, 1j * w, c.B))[0, 0] + c.D) *
                    np.exp(-1j * w * c.theta) for w in omega.ravel()],
                   dtype=complex)
    return complex(out[0]) if omega.ndim == 0 else out.reshape(omega.shape)


def controller_poles(c):
    return eigenvalues(c.A)


def controller_to_dict(c):
    f = c.filter
    return {
        'A_Q': c.A.tolist(),
        'B_Q': c.B.ravel().tolist(),
        'C_Q': c.C.ravel().tolist(),
        'D_Q': c.D,
        'theta_s': c.theta,
        'l_b': c.l_b,
        'order': c.order,
        'transfer_check': c.transfer_check,
        'provenance': c.provenance,
        'plant': plant_to_config(c.plant),
        'filter': {
            'A': f.A.tolist(),
            'B': f.B.ravel().tolist(),
            'C': f.C.ravel().tolist(),
            'K': np.ravel(f.K).tolist(),
            'n_r': f.n_r,
            'aux_poles': [[p.real, p.imag] for p in f.aux_poles],
            'omega_b_rad_s': f.harmonics.base,
            'frequencies_rad_s': list(f.harmonics.frequencies),
            'condition': f.condition}}


def controller_from_dict(d):
    try:
        fd = d['filter']
        h = HarmonicSet(fd['omega_b_rad_s'], tuple(fd['frequencies_rad_s']))
        f = FilterRealization(np.array(fd['A'], dtype=float),
                              np.array(fd['B'], dtype=float).reshape(-1, 1),
                              np.array(fd['C'], dtype=float).reshape(1, -1),
                              np.array(fd['K'], dtype=float).reshape(1, -1),
                              int(fd['n_r']), h,
                              tuple(complex(re, im) for re, im in fd['aux_poles']),
                              float(fd.get('condition', float('nan'))))
        f = replace(f, report=verify_filter(f, h, f.n_r))
        plant = plant_from_config(d['plant'])
        A = np.array(d['A_Q'], dtype=float)
        c = ImcController(A, np.array(d['B_Q'], dtype=float).reshape(-1, 1),
                          np.array(d['C_Q'], dtype=float).reshape(1, -1),
                          float(d['D_Q']), float(d['theta_s']), int(d['l_b']),
                          f, plant, float(d.get('transfer_check', 0.0)),
                          d.get('provenance', ''))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError('malformed controller file: %s' % exc)
    return c


def save_controller(c, path):
    with open(path, 'w') as out:
        json.dump(controller_to_dict(c), out, indent=2)


def load_controller(path):
    if not Path(path).exists():
        raise MissingFile('controller file %s not found' % path)
    try:
        with open(path, 'r') as f:
            d = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError('controller file %s is not valid JSON: %s' %
                          (path, exc))
    return controller_from_dict(d)
