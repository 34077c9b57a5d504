# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Periodic signal model 1/(s prod(s^2 + w_i^2)) in state-space form and
#  Fourier analysis of measured periodic records.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

import csv
from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as P

from perimc.errors import (CommensurabilityError, NonIntegerPeriod,
                           NyquistViolation, VerificationFailed, ConfigError)
from perimc.numkernel import StateSpaceModel

GAMMA_TOL = 1e-9


@dataclass(frozen=True)
class HarmonicSet:
    """Base frequency and targeted harmonics, all in rad/s."""
    base: float
    frequencies: tuple

    def __post_init__(self):
        base = float(self.base)
        if not base > 0:
            raise CommensurabilityError('base frequency must be positive, '
                                        'got %s' % self.base)
        freqs = tuple(float(w) for w in self.frequencies)
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise CommensurabilityError('harmonic frequencies must be '
                                        'distinct and increasing',
                                        frequencies=list(freqs))
        for w in freqs:
            gamma = w / base
            if round(gamma) < 1 or abs(gamma - round(gamma)) > GAMMA_TOL * max(gamma, 1.0):
                raise CommensurabilityError(
                    '%.6g rad/s is not an integer multiple of %.6g rad/s' %
                    (w, base), frequency=w, ratio=gamma)
        object.__setattr__(self, 'base', base)
        object.__setattr__(self, 'frequencies', freqs)

    @property
    def k(self):
        return len(self.frequencies)

    @property
    def gammas(self):
        return tuple(int(round(w / self.base)) for w in self.frequencies)

    @property
    def period(self):
        return 2 * np.pi / self.base


@dataclass(frozen=True)
class FourierDecomposition:
    """v(t) = c_0/2 + sum_l c_l cos(2 pi l t / T - phi_l)."""
    period: float
    coefficients: tuple
    phases: tuple

    @property
    def L(self):
        return len(self.coefficients) - 1

    def amplitude(self, l):
        return self.coefficients[l]


def harmonic_set(omega_b, k):
    if k < 1:
        raise ValueError('harmonic count must be at least 1, got %s' % k)
    return HarmonicSet(omega_b, tuple(i * omega_b for i in range(1, k + 1)))


def harmonic_set_from_list(omega_b, frequencies):
    freqs = sorted(float(w) for w in frequencies)
    if len(set(freqs)) != len(freqs):
        raise CommensurabilityError('repeated harmonic frequency in %s' %
                                    freqs, frequencies=freqs)
    return HarmonicSet(omega_b, tuple(freqs))


def realize_signal_model(h):
    """Modal realization: integrator plus one rotation block per harmonic.

    B_R feeds the second state of every block and C_R is all ones, which
    keeps the pair observable; signal_model_output_row gives the row that
    reproduces 1/(s prod(s^2 + w_i^2)) exactly.
    """
    n = 2 * h.k + 1
    A = np.zeros((n, n))
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    for i, w in enumerate(h.frequencies):
        j = 1 + 2 * i
        A[j, j + 1] = w
        A[j + 1, j] = -w
        B[j + 1, 0] = 1.0
    return StateSpaceModel(A, B, np.ones((1, n)), 0.0)


def signal_model_output_row(h):
    """Residues of the signal model in the modal coordinates."""
    w2 = np.asarray(h.frequencies) ** 2
    C = np.zeros((1, 2 * h.k + 1))
    C[0, 0] = 1.0 / np.prod(w2) if h.k else 1.0
    for i in range(h.k):
        others = np.prod(np.delete(w2, i) - w2[i])
        C[0, 2 + 2 * i] = -1.0 / (w2[i] * others)
    return C


def signal_model_transfer(h, s):
    s = np.asarray(s, dtype=complex)
    out = 1.0 / s
    for w in h.frequencies:
        out = out / (s * s + w * w)
    return complex(out) if out.ndim == 0 else out


def generator_polynomial(h):
    """Ascending coefficients of s prod(s^2 + w_i^2)."""
    z = np.array([0.0, 1.0])
    for w in h.frequencies:
        z = P.polymul(z, [w * w, 0.0, 1.0])
    return z


def companion_signal_model(h):
    """Controllable canonical realization of 1/z(s)."""
    z = generator_polynomial(h)
    n = len(z) - 1
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -z[:-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = np.zeros((1, n))
    C[0, 0] = 1.0
    return StateSpaceModel(A, B, C, 0.0)


def fourier_analyze(samples, h, T, L):
    """Harmonic amplitudes and phases by correlation over whole periods.

    Parameters
    ----------
    samples : array_like
        Uniformly sampled record, first sample at t = 0.
    h : float
        Sample period in s.
    T : float
        Signal period in s; T/h must be within 0.01 of an integer.
    L : int
        Highest harmonic to extract.

    Returns
    -------
    FourierDecomposition
    """
    v = np.asarray(samples, dtype=float).ravel()
    ratio = T / h
    M = int(round(ratio))
    if M < 1 or abs(ratio - M) > 0.01:
        raise NonIntegerPeriod('period %.6g s is not a whole number of '
                               'samples (T/h = %.4f)' % (T, ratio), ratio=ratio)
    periods = len(v) // M
    if periods < 1:
        raise NonIntegerPeriod('record of %d samples is shorter than one '
                               'period (%d samples)' % (len(v), M))
    if 2 * L > ratio + 1e-9:
        raise NyquistViolation('harmonic %d at %.6g rad/s is above the '
                               'Nyquist frequency %.6g rad/s' %
                               (L, 2 * np.pi * L / T, np.pi / h))
    N = periods * M
    v = v[:N]
    t = np.arange(N) * h
    coeffs = [2.0 * np.mean(v)]
    phases = []
    for l in range(1, L + 1):
        fac = 1.0 / N if 2 * l == M else 2.0 / N
        c = fac * np.sum(v * np.exp(-2j * np.pi * l * t / T))
        coeffs.append(float(np.abs(c)))
        phases.append(float(-np.angle(c)))
    power = np.mean(v * v)
    parts = (coeffs[0] / 2) ** 2 + sum(
        c * c if 2 * l == M else c * c / 2 for l, c in enumerate(coeffs[1:], 1))
    if parts > power * (1 + 1e-6) + 1e-300:
        raise VerificationFailed('harmonic power %.6g exceeds record power '
                                 '%.6g' % (parts, power))
    return FourierDecomposition(float(T), tuple(coeffs), tuple(phases))


def dominant_harmonics(decomp, count, omega_b=None):
    """HarmonicSet of the `count` strongest harmonics of a record."""
    omega_b = 2 * np.pi / decomp.period if omega_b is None else omega_b
    amps = np.asarray(decomp.coefficients[1:])
    order = np.argsort(-amps, kind='stable')[:count]
    ls = sorted(int(i) + 1 for i in order if amps[i] > 0)
    return HarmonicSet(omega_b, tuple(l * 2 * np.pi / decomp.period
                                      for l in ls))


def load_record(path):
    """Two-column CSV (time s, value); a text header line is skipped."""
    t, v = [], []
    with open(path, 'r', newline='') as f:
        for row in csv.reader(f):
            if not row or row[0].strip().startswith('#'):
                continue
            try:
                t.append(float(row[0]))
                v.append(float(row[1]))
            except ValueError:
                if t:
                    raise ConfigError('bad row %s in %s' % (row, path))
    t = np.asarray(t)
    v = np.asarray(v)
    if len(t) < 2:
        raise ConfigError('record %s has fewer than two samples' % path)
    steps = np.diff(t)
    h = float(np.median(steps))
    if np.max(np.abs(steps - h)) > 1e-6 * h + 1e-12:
        raise ConfigError('record %s is not uniformly sampled' % path)
    return t, v, h


def write_record(path, t, v):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['t', 'value'])
        for row in zip(t, v):
            writer.writerow(['%.9g' % row[0], '%.12g' % row[1]])
