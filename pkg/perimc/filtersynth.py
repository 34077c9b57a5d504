# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Filter synthesis F(s) = (p(s) - z(s))/p(s): LQR placement of the
#  signal-model poles, relative-degree expansion with auxiliary poles
#  and the input-matrix solve that puts the sensitivity zeros at 0 and
#  at every targeted harmonic.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.signal as signal

from perimc.errors import (UnstableAuxiliaryPole, NotStabilizable,
                           RealizationNotCanonical, SingularMatrix,
                           StackedSystemSingular, ConfigError, PoleHit)
from perimc.numkernel import (StateSpaceModel, care_solve, eigenvalues,
                              solve_linear, resolvent, markov_parameters)
from perimc.sigmodel import realize_signal_model

LQR_MARGIN = 1e-6
INTERPOLATION_TOL = 1e-8
MARKOV_TOL = 1e-9


def default_aux_poles(h, n_r):
    """n_r - 1 distinct real poles from -100 downwards in steps of 10,
    scaled by w_k / 32 pi."""
    if n_r <= 1:
        return ()
    scale = max(h.frequencies) / (32 * np.pi) if h.k else h.base / (32 * np.pi)
    poles = np.linspace(-100.0, -100.0 - 10.0 * (n_r - 2), n_r - 1) * scale
    return tuple(complex(p) for p in poles)


def _pair_poles(poles):
    """Split into real poles and upper-half-plane representatives of
    conjugate pairs; raise when the list is not conjugate closed."""
    poles = np.asarray(poles, dtype=complex).ravel()
    if np.any(poles.real >= 0):
        bad = [str(p) for p in poles if p.real >= 0]
        raise UnstableAuxiliaryPole('auxiliary poles must have negative real '
                                    'part: %s' % ', '.join(bad), poles=bad)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(poles)))) if poles.size else 0
    real = sorted(p.real for p in poles if abs(p.imag) <= tol)
    upper = sorted((p for p in poles if p.imag > tol),
                   key=lambda p: (p.real, p.imag))
    lower = sorted((p.conjugate() for p in poles if p.imag < -tol),
                   key=lambda p: (p.real, p.imag))
    if len(upper) != len(lower) or not np.allclose(upper, lower, rtol=1e-9,
                                                   atol=tol):
        raise UnstableAuxiliaryPole('auxiliary poles are not closed under '
                                    'conjugation', poles=[str(p) for p in poles])
    return real, upper


@dataclass(frozen=True, eq=False)
class FilterDesignSpec:
    harmonics: object
    n_r: int = 1
    Q: Optional[np.ndarray] = None
    R: float = 1.0
    aux_poles: Optional[tuple] = None

    def __post_init__(self):
        n_R = 2 * self.harmonics.k + 1
        if int(self.n_r) != self.n_r or self.n_r < 1:
            raise ConfigError('relative degree must be an integer >= 1, got %s'
                              % self.n_r)
        object.__setattr__(self, 'n_r', int(self.n_r))
        Q = np.eye(n_R) if self.Q is None else np.asarray(self.Q, dtype=float)
        if Q.ndim == 0:
            Q = float(Q) * np.eye(n_R)
        if Q.shape != (n_R, n_R):
            raise ConfigError('LQR weight Q must be %d x %d, got %s' %
                              (n_R, n_R, Q.shape))
        if not np.allclose(Q, Q.T) or np.min(la.eigvalsh(Q)) < -1e-12 * max(np.max(np.abs(Q)), 1.0):
            raise ConfigError('LQR weight Q must be symmetric positive '
                              'semidefinite')
        if not float(self.R) > 0:
            raise ConfigError('LQR weight R must be positive, got %s' % self.R)
        object.__setattr__(self, 'Q', Q)
        object.__setattr__(self, 'R', float(self.R))
        aux = default_aux_poles(self.harmonics, self.n_r) \
            if self.aux_poles is None else tuple(complex(p) for p in self.aux_poles)
        if len(aux) != self.n_r - 1:
            raise ConfigError('expected %d auxiliary poles for relative degree '
                              '%d, got %d' % (self.n_r - 1, self.n_r, len(aux)))
        _pair_poles(aux)
        object.__setattr__(self, 'aux_poles', aux)

    @property
    def order(self):
        return 2 * self.harmonics.k + self.n_r


@dataclass(frozen=True)
class FilterVerification:
    dc_error: float
    harmonic_error: float
    markov_ratio: float
    stability_margin: float
    n_r: int

    @property
    def passed(self):
        return (self.dc_error <= INTERPOLATION_TOL and
                self.harmonic_error <= INTERPOLATION_TOL and
                self.markov_ratio <= MARKOV_TOL and
                self.stability_margin > 0)

    def to_dict(self):
        return {'dc_error': self.dc_error,
                'harmonic_error': self.harmonic_error,
                'markov_ratio': self.markov_ratio,
                'stability_margin': self.stability_margin,
                'relative_degree': self.n_r,
                'passed': self.passed}


@dataclass(frozen=True, eq=False)
class FilterRealization:
    """Sigma(A, B, -C, 0): the filter output is -C x."""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    K: np.ndarray
    n_r: int
    harmonics: object
    aux_poles: tuple = ()
    condition: float = float('nan')
    report: Optional[FilterVerification] = field(default=None)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def model(self):
        return StateSpaceModel(self.A, self.B, -self.C, 0.0)


@dataclass(frozen=True)
class EtaCoefficients:
    coefficients: np.ndarray
    degree: int
    relative_degree: int


def lqr_gain(A_R, B_R, Q, R):
    """K = R^-1 B' P with P the stabilizing CARE solution."""
    A_R = np.asarray(A_R, dtype=float)
    B_R = np.asarray(B_R, dtype=float).reshape(A_R.shape[0], -1)
    R = float(R)
    P = care_solve(A_R, B_R, Q, [[R]])
    K = (B_R.T @ P) / R
    eigs = eigenvalues(A_R - B_R @ K)
    if eigs.size and np.max(eigs.real) > -LQR_MARGIN:
        raise NotStabilizable('closed loop margin %.3e below %.0e' %
                              (-np.max(eigs.real), LQR_MARGIN))
    return K


def eta_coefficients(K, A_R, B_R, C_R):
    """Coefficients of eta(s) = p(s) - z(s) from K O_R^-1.

    Only meaningful for a realization of 1/z(s) with relative degree n
    (companion_signal_model); the modal realization is rejected.
    """
    A_R = np.asarray(A_R, dtype=float)
    n = A_R.shape[0]
    B_R = np.asarray(B_R, dtype=float).reshape(n, 1)
    C_R = np.asarray(C_R, dtype=float).reshape(1, n)
    K = np.asarray(K, dtype=float).reshape(1, n)
    markov = markov_parameters(A_R, B_R, C_R, n - 1)
    normA = max(np.linalg.norm(A_R, 2), 1e-300)
    for r, m in enumerate(markov):
        bound = MARKOV_TOL * np.linalg.norm(C_R) * normA ** r * np.linalg.norm(B_R)
        if abs(m) > bound:
            raise RealizationNotCanonical(
                'Markov parameter C A^%d B = %.3e is not zero; pass the '
                'companion realization of 1/z(s)' % (r, m), index=r, value=m)
    O_R = np.vstack([C_R @ np.linalg.matrix_power(A_R, r) for r in range(n)])
    eta, _ = solve_linear(O_R.T, K.T)
    eta = eta.ravel()
    big = np.max(np.abs(eta)) if eta.size else 0.0
    nz = np.nonzero(np.abs(eta) > 1e-12 * big)[0]
    degree = int(nz[-1]) if nz.size else 0
    return EtaCoefficients(eta, degree, n - degree)


def assemble_A(A_R, B_R, K, aux_poles):
    """blkdiag(A_R - B_R K, A_rel), A_rel in real block form."""
    real, upper = _pair_poles(aux_poles) if len(aux_poles) else ([], [])
    blocks = [np.asarray(A_R, dtype=float) -
              np.asarray(B_R, dtype=float).reshape(-1, 1) @
              np.asarray(K, dtype=float).reshape(1, -1)]
    for p in real:
        blocks.append(np.array([[p]]))
    for p in upper:
        blocks.append(np.array([[p.real, p.imag], [-p.imag, p.real]]))
    return la.block_diag(*blocks)


def solve_B(A, C, h, n_r):
    """Input matrix placing F(0) = F(jw_i) = 1 with relative degree n_r.

    Rows: C (sI - A)^-1 B = -1 at s = 0 and s = jw_i (real and imaginary
    parts), then C A^r B = 0 for r < n_r - 1. Every row is scaled to unit
    max-norm before the solve.

    Returns
    -------
    B : (n, 1) ndarray
    report : ConditionReport of the stacked solve
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    C = np.asarray(C, dtype=float).reshape(1, n)
    if n != 2 * h.k + n_r:
        raise ConfigError('filter order %d does not match 2k + n_r = %d' %
                          (n, 2 * h.k + n_r))
    rows, rhs = [], []
    try:
        x, _ = solve_linear(-A.T, C.ravel())
        rows.append(x.real)
        rhs.append(-1.0)
        for w in h.frequencies:
            x, _ = solve_linear(1j * w * np.eye(n) - A.T, C.ravel().astype(complex))
            rows.extend([x.real, x.imag])
            rhs.extend([-1.0, 0.0])
    except SingularMatrix as exc:
        raise StackedSystemSingular('a filter pole sits on an interpolation '
                                    'point: %s' % exc.message, **exc.details)
    v = C.ravel()
    for _ in range(n_r - 1):
        rows.append(v.copy())
        rhs.append(0.0)
        v = v @ A
    M = np.array(rows)
    rhs = np.array(rhs)
    scale = np.max(np.abs(M), axis=1)
    M = M / scale[:, None]
    rhs = rhs / scale
    try:
        B, report = solve_linear(M, rhs)
    except SingularMatrix as exc:
        raise StackedSystemSingular('stacked interpolation system is singular',
                                    condition=float(np.linalg.cond(M)),
                                    **exc.details)
    return B.reshape(n, 1), report


def filter_response(f, omega):
    """F(jw) = -C (jwI - A)^-1 B for scalar or array w."""
    omega = np.asarray(omega, dtype=float)
    out = np.array([-(f.C @ resolvent(f.A, 1j * w, f.B))[0, 0]
                    for w in omega.ravel()], dtype=complex)
    return complex(out[0]) if omega.ndim == 0 else out.reshape(omega.shape)


def verify_filter(f, h, n_r):
    dc = abs(filter_response(f, 0.0) - 1.0)
    harm = max((abs(filter_response(f, w) - 1.0) for w in h.frequencies),
               default=0.0)
    markov = markov_parameters(f.A, f.B, f.C, max(n_r - 1, 0))
    ratio = float(np.max(np.abs(markov)) /
                  (np.linalg.norm(f.C) * np.linalg.norm(f.B))) if markov.size else 0.0
    margin = float(-np.max(eigenvalues(f.A).real))
    return FilterVerification(float(dc), float(harm), ratio, margin, n_r)


def build_filter(spec):
    """LQR gain, relative-degree expansion and B solve; C is all ones."""
    signalModel = realize_signal_model(spec.harmonics)
    K = lqr_gain(signalModel.A, signalModel.B, spec.Q, spec.R)
    A = assemble_A(signalModel.A, signalModel.B, K, spec.aux_poles)
    C = np.ones((1, A.shape[0]))
    B, report = solve_B(A, C, spec.harmonics, spec.n_r)
    f = FilterRealization(A, B, C, K, spec.n_r, spec.harmonics,
                          spec.aux_poles, report.condition)
    return replace(f, report=verify_filter(f, spec.harmonics, spec.n_r))


def state_feedback_filter(A_R, B_R, K):
    """Optimal relative-degree-one filter (A_R - B_R K, B_R, K, 0)."""
    A_R = np.asarray(A_R, dtype=float)
    B_R = np.asarray(B_R, dtype=float).reshape(-1, 1)
    K = np.asarray(K, dtype=float).reshape(1, -1)
    return StateSpaceModel(A_R - B_R @ K, B_R, K, 0.0)


def _match_known(roots, known):
    """Remove the closest root for every known value; return the rest."""
    rest = list(roots)
    for r in known:
        i = int(np.argmin([abs(x - r) for x in rest]))
        rest.pop(i)
    return np.array(rest, dtype=complex)


def _polish_zero(f, s, steps=4):
    """Newton on 1 + C (sI - A)^-1 B; a step is kept only if it shrinks
    the residual."""
    try:
        x = resolvent(f.A, s, f.B)
        val = 1.0 + (f.C @ x)[0, 0]
        for _ in range(steps):
            der = -(f.C @ resolvent(f.A, s, x))[0, 0]
            if der == 0:
                break
            trial = s - val / der
            xt = resolvent(f.A, trial, f.B)
            vt = 1.0 + (f.C @ xt)[0, 0]
            if abs(vt) >= abs(val):
                break
            s, x, val = trial, xt, vt
    except PoleHit:
        pass
    return s


def filter_factors(f, h=None):
    """Roots of p(s) = det(sI - A) and of z(s) = det(sI - A + BC).

    Both are monic, so F(s) = 1 - z(s)/p(s). z has the exact roots 0 and
    +-jw_i; its remaining n_r - 1 roots are the eigenvalues of A - BC left
    after removing the harmonic ones, polished by Newton steps.
    """
    h = f.harmonics if h is None else h
    known = [0.0] + [s * 1j * w for w in h.frequencies for s in (1, -1)]
    aux = _match_known(eigenvalues(f.A - f.B @ f.C), known)
    aux = np.array([_polish_zero(f, complex(r)) for r in aux], dtype=complex)
    zeros = np.concatenate([np.array(known, dtype=complex), aux])
    return eigenvalues(f.A), zeros


def filter_step_response(f, h=1e-3, T_end=2.0):
    t = np.arange(int(round(T_end / h)) + 1) * h
    system = signal.StateSpace(f.A, f.B, -f.C, np.zeros((1, 1)))
    t, y = signal.step(system, T=t)
    return t, y


def _step_metrics(t, y):
    final = 1.0
    rise = float('nan')
    above10 = np.nonzero(y >= 0.1 * final)[0]
    above90 = np.nonzero(y >= 0.9 * final)[0]
    if above10.size and above90.size:
        rise = float(t[above90[0]] - t[above10[0]])
    return rise, float(max(np.max(y) - final, 0.0))


def compare_aux_placements(spec, scales=(0.5, 1.0, 2.0), T_end=2.0,
                           omega=None):
    """Step and frequency metrics of the filter for scaled A_rel poles,
    next to the optimal relative-degree-one filter."""
    h = spec.harmonics
    if omega is None:
        omega = np.logspace(-1, np.log10(50 * max(h.frequencies)), 2000)
    rows = []
    signalModel = realize_signal_model(h)
    K = lqr_gain(signalModel.A, signalModel.B, spec.Q, spec.R)
    opt = state_feedback_filter(signalModel.A, signalModel.B, K)
    system = signal.StateSpace(opt.A, opt.B, opt.C, np.zeros((1, 1)))
    t, y = signal.step(system, T=np.arange(int(round(T_end / 1e-3)) + 1) * 1e-3)
    rise, overshoot = _step_metrics(t, y)
    peak = max(abs(opt.response(1j * w)) for w in omega)
    rows.append({'placement': 'optimal', 'scale': float('nan'),
                 'n_r': 1, 'rise_time_s': rise, 'overshoot': overshoot,
                 'peak_gain': float(peak)})
    for scale in scales:
        aux = tuple(p * scale for p in spec.aux_poles)
        f = build_filter(replace(spec, aux_poles=aux))
        t, y = filter_step_response(f, 1e-3, T_end)
        rise, overshoot = _step_metrics(t, y)
        peak = float(np.max(np.abs(filter_response(f, omega))))
        rows.append({'placement': 'aux x %g' % scale, 'scale': float(scale),
                     'n_r': spec.n_r, 'rise_time_s': rise,
                     'overshoot': overshoot, 'peak_gain': peak})
    return rows
