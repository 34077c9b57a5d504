# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Sampled closed-loop simulation of the IMC scheme: ZOH discretized
#  controller, plant and model, sample based delay lines, disturbance
#  and reference generators and harmonic residual metrics.
#
#  This script is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License <http://www.gnu.org/licenses/> for
#  more details
#
#######################################################################

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.signal as signal
from tqdm import tqdm

from perimc.errors import (UnstableSimulation, NyquistViolation,
                           NonIntegerPeriod, ConfigError)
from perimc.numkernel import zoh_discretize
from perimc.plantmodel import plant_state_space, plant_from_config
from perimc.sigmodel import (FourierDecomposition, HarmonicSet,
                             fourier_analyze, harmonic_set, load_record)

BLOWUP = 1e6
# e-path step plus the half-sample lags of the two held blocks
SAMPLING_LAG = 2


class DelayLine:
    """FIFO of round(delay/h) samples, pre-filled with zeros.

    rounding_error = N h - delay is at most h/2 in magnitude.
    """

    def __init__(self, delay, h):
        if h <= 0:
            raise ValueError('sample period must be positive, got %s' % h)
        if delay < 0:
            raise ValueError('delay must be nonnegative, got %s' % delay)
        self.h = h
        self.delay = float(delay)
        self.N = int(round(delay / h))
        self.rounding_error = self.N * h - self.delay
        self.buffer = deque([0.0] * self.N)

    def push(self, value):
        if self.N == 0:
            return value
        self.buffer.append(value)
        return self.buffer.popleft()


class DiscreteSystem:
    """x+ = Ad x + Bd u, y = Cd x + Dd u."""

    def __init__(self, Ad, Bd, Cd, Dd, h, x0=None):
        if h <= 0:
            raise ValueError('sample period must be positive, got %s' % h)
        self.Ad = np.atleast_2d(Ad) if np.size(Ad) else np.zeros((0, 0))
        n = self.Ad.shape[0]
        self.Bd = np.asarray(Bd, dtype=float).reshape(n)
        self.Cd = np.asarray(Cd, dtype=float).reshape(n)
        self.Dd = float(Dd)
        self.h = h
        self.x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).reshape(n).copy()

    @classmethod
    def from_continuous(cls, model, h, x0=None):
        Ad, Bd = zoh_discretize(model.A, model.B, h)
        return cls(Ad, Bd, model.C, model.D, h, x0)

    @property
    def order(self):
        return self.Ad.shape[0]

    def step(self, u):
        """Output at the current sample, then advance the state."""
        y = self.Cd @ self.x + self.Dd * u
        self.x = self.Ad @ self.x + self.Bd * u
        return float(y)

    def response(self, z):
        """Cd (zI - Ad)^-1 Bd + Dd at a complex point z."""
        n = self.order
        if n == 0:
            return complex(self.Dd)
        w = np.linalg.solve(z * np.eye(n) - self.Ad, self.Bd)
        return complex(self.Cd @ w + self.Dd)


def sampled_loop_error(ctrl, internal, frequencies, lag, h):
    """max |z^-lag G_m(z) Q(z) - 1| over z = e^{jwh}; zero means the sampled
    loop rejects these frequencies exactly."""
    worst = 0.0
    for w in frequencies:
        z = np.exp(1j * w * h)
        gain = np.exp(-1j * w * h * lag) * internal.response(z) * ctrl.response(z)
        worst = max(worst, abs(gain - 1.0))
    return worst


def correct_output_row(ctrl, internal, frequencies, lag, h):
    """Minimum-norm change of the controller output row Cd so that the
    sampled loop gain z^-lag G_m(z) Q(z) is one at every given frequency.

    Rows are the real and imaginary parts of (zI - Ad)^-1 Bd, split as in
    the stacked input-matrix solve of the filter.

    Returns
    -------
    change : float
        |delta Cd| / |Cd|.
    """
    n = ctrl.order
    rows, rhs = [], []
    for w in frequencies:
        z = np.exp(1j * w * h)
        v = np.linalg.solve(z * np.eye(n) - ctrl.Ad, ctrl.Bd)
        target = np.exp(1j * w * h * lag) / internal.response(z)
        gap = target - (ctrl.Cd @ v + ctrl.Dd)
        rows.extend([v.real, v.imag])
        rhs.extend([gap.real, gap.imag])
    M = np.array(rows)
    rhs = np.array(rhs)
    scale = np.max(np.abs(M), axis=1)
    scale[scale == 0.0] = 1.0
    delta = np.linalg.lstsq(M / scale[:, None], rhs / scale, rcond=None)[0]
    change = float(np.linalg.norm(delta) / max(np.linalg.norm(ctrl.Cd), 1e-300))
    ctrl.Cd = ctrl.Cd + delta
    return change


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    h: float
    r: np.ndarray
    d: np.ndarray
    u: np.ndarray
    y: np.ndarray
    ym: np.ndarray
    t_on: float
    t0: float = 0.0
    report: dict = field(default_factory=dict)

    @property
    def N(self):
        return len(self.y)

    @property
    def t(self):
        return self.t0 + np.arange(self.N) * self.h


def _series(sig, t):
    """Arrays pass through, callables are sampled, scalars broadcast."""
    if sig is None:
        return np.zeros(len(t))
    if callable(sig):
        return np.asarray([sig(x) for x in t], dtype=float)
    arr = np.asarray(sig, dtype=float)
    if arr.ndim == 0:
        return np.full(len(t), float(arr))
    if len(arr) < len(t):
        raise ConfigError('signal has %d samples, the run needs %d' %
                          (len(arr), len(t)))
    return arr[:len(t)]


def simulate_imc(plant_true, model, c, r, d, h, T_end, t_on=0.0, x0=None,
                 compensate_sampling=True, progress=False):
    """Run the sampled IMC loop.

    Per step: read r and d; e = r - (y_prev - ym_prev); controller output
    into the theta line; popped u into the tau_s and tau_m lines; plant
    and model outputs; y = plant output + d. Before t_on the controller
    output is 0 and its state stays at x0.

    With compensate_sampling the theta line is two samples shorter, which
    takes out the one-step e-path delay and the two half sample ZOH lags,
    and the controller output row is re-solved so that the sampled loop
    z^-lag G_m(z) Q(z) is one at DC and at every targeted harmonic.

    Raises
    ------
    UnstableSimulation
        |y| above 1e6 max(|d|, |r|, 1); the partial trace is attached as
        the `trace` attribute.
    """
    if h <= 0:
        raise ValueError('sample period must be positive, got %s' % h)
    N = int(round(T_end / h))
    t = np.arange(N) * h
    r = _series(r, t)
    d = _series(d, t)
    plant = DiscreteSystem.from_continuous(plant_state_space(plant_true), h)
    internal = DiscreteSystem.from_continuous(plant_state_space(model), h)
    ctrl = DiscreteSystem.from_continuous(c.model, h, x0)
    lag = min(SAMPLING_LAG, int(round(c.theta / h))) if compensate_sampling else 0
    thetaLine = DelayLine(max(c.theta - lag * h, 0.0), h)
    plantLine = DelayLine(plant_true.tau, h)
    modelLine = DelayLine(model.tau, h)
    effective = (thetaLine.N + plantLine.N + lag) * h
    loopLag = 1 + thetaLine.N + modelLine.N
    frequencies = [0.0] + list(c.filter.harmonics.frequencies)
    change = 0.0
    if compensate_sampling:
        change = correct_output_row(ctrl, internal, frequencies, loopLag, h)
    report = {
        'theta_samples': thetaLine.N,
        'theta_compensation_samples': lag,
        'theta_rounding_s': thetaLine.rounding_error,
        'tau_plant_samples': plantLine.N,
        'tau_model_samples': modelLine.N,
        'tau_plant_rounding_s': plantLine.rounding_error,
        'tau_model_rounding_s': modelLine.rounding_error,
        'effective_delay_s': effective,
        'delay_rounding_error_s': effective - (plant_true.tau + c.theta),
        'output_row_change': change,
        'sampled_loop_error': sampled_loop_error(ctrl, internal, frequencies,
                                                 loopLag, h),
        'compensate_sampling': bool(compensate_sampling)}
    bound = BLOWUP * max(np.max(np.abs(d)) if N else 0.0,
                         np.max(np.abs(r)) if N else 0.0, 1.0)
    u = np.zeros(N)
    y = np.zeros(N)
    ym = np.zeros(N)
    yPrev = ymPrev = 0.0
    for k in tqdm(range(N), disable=not progress, desc='simulation'):
        e = r[k] - (yPrev - ymPrev)
        v = ctrl.step(e) if t[k] >= t_on else 0.0
        u[k] = thetaLine.push(v)
        yp = plant.step(plantLine.push(u[k]))
        ym[k] = internal.step(modelLine.push(u[k]))
        y[k] = yp + d[k]
        if not abs(y[k]) <= bound:
            partial = SimulationTrace(h, r[:k + 1], d[:k + 1], u[:k + 1],
                                      y[:k + 1], ym[:k + 1], t_on,
                                      report=report)
            exc = UnstableSimulation('output %.3e exceeds %.3e at t = %.4f s'
                                     % (y[k], bound, t[k]), step=k,
                                     time_s=float(t[k]))
            exc.trace = partial
            raise exc
        yPrev, ymPrev = y[k], ym[k]
    return SimulationTrace(h, r, d, u, y, ym, t_on, report=report)


def sawtooth(T, amplitude, h, T_end):
    """Rising ramp from -amplitude to amplitude, sampled at mid-sample
    points so every whole period has zero mean."""
    if not T > 2 * h:
        raise ValueError('sawtooth period %s must exceed two samples' % T)
    k = np.arange(int(round(T_end / h)))
    return amplitude * (2.0 * np.mod((k + 0.5) * h / T, 1.0) - 1.0)


def harmonic_disturbance(h_set, amplitudes=None):
    """FourierDecomposition with amplitude 1/gamma (or the given list) at
    every harmonic of the set and zero phase."""
    gammas = h_set.gammas
    if amplitudes is None:
        amplitudes = [1.0 / g for g in gammas]
    if len(amplitudes) != len(gammas):
        raise ConfigError('expected %d amplitudes, got %d' %
                          (len(gammas), len(amplitudes)))
    L = max(gammas) if gammas else 0
    coeffs = [0.0] * (L + 1)
    for g, a in zip(gammas, amplitudes):
        coeffs[g] = float(a)
    return FourierDecomposition(h_set.period, tuple(coeffs), (0.0,) * L)


def synth_disturbance(source, h, T_end):
    """v(t) = c_0/2 + sum c_l cos(2 pi l t / T - phi_l) at t = 0, h, ..."""
    if isinstance(source, HarmonicSet):
        source = harmonic_disturbance(source)
    T = source.period
    if source.L and 2 * np.pi * source.L / T > np.pi / h:
        raise NyquistViolation('harmonic %d at %.6g rad/s is above the Nyquist '
                               'frequency %.6g rad/s' %
                               (source.L, 2 * np.pi * source.L / T, np.pi / h))
    t = np.arange(int(round(T_end / h))) * h
    v = np.full(len(t), source.coefficients[0] / 2)
    for l in range(1, source.L + 1):
        c = source.coefficients[l]
        if c:
            v += c * np.cos(2 * np.pi * l * t / T - source.phases[l - 1])
    return v


def shape_signal(sig, plant, h):
    """Pass a sampled signal through G(s) e^{-s tau} with ZOH."""
    sig = np.asarray(sig, dtype=float)
    delay = int(round(plant.tau / h))
    held = np.concatenate([np.zeros(delay), sig])[:len(sig)]
    model = plant_state_space(plant)
    if model.order == 0:
        return model.D * held
    Ad, Bd = zoh_discretize(model.A, model.B, h)
    _, y, _ = signal.dlsim((Ad, Bd, model.C, np.array([[model.D]]), h), held)
    return np.ravel(y)


def step_signal(value, t_step, h, T_end):
    t = np.arange(int(round(T_end / h))) * h
    return np.where(t >= t_step, float(value), 0.0)


def sine_signal(amplitude, omega, h, T_end, phase=0.0):
    t = np.arange(int(round(T_end / h))) * h
    return amplitude * np.sin(omega * t + phase)


def signal_from_config(section, h, T_end, omega_b=None):
    """Disturbance or reference series from a config section.

    kinds: zero, constant, step, sine, sawtooth, harmonics, record; an
    optional `shaping` plant section filters the result.
    """
    section = section or {'kind': 'zero'}
    kind = section.get('kind', 'zero')
    N = int(round(T_end / h))
    if kind == 'zero':
        v = np.zeros(N)
    elif kind == 'constant':
        v = np.full(N, float(section.get('value', 1.0)))
    elif kind == 'step':
        v = step_signal(section.get('value', 1.0), section.get('t_step_s', 0.0),
                        h, T_end)
    elif kind == 'sine':
        v = sine_signal(section.get('amplitude', 1.0), section['omega_rad_s'],
                        h, T_end, section.get('phase_rad', 0.0))
    elif kind == 'sawtooth':
        v = sawtooth(section['period_s'], section.get('amplitude', 1.0), h, T_end)
    elif kind == 'harmonics':
        base = section.get('omega_b_rad_s', omega_b)
        if base is None:
            raise ConfigError('harmonic disturbance needs omega_b_rad_s')
        hs = harmonic_set(base, int(section.get('count', 1)))
        decomp = harmonic_disturbance(hs, section.get('amplitudes'))
        v = float(section.get('scale', 1.0)) * synth_disturbance(decomp, h, T_end)
    elif kind == 'record':
        _, values, step = load_record(section['path'])
        if abs(step - h) > 1e-9 * h:
            raise ConfigError('record sample period %g differs from h = %g' %
                              (step, h))
        v = np.resize(values, N)
    else:
        raise ConfigError('unknown signal kind %s' % kind)
    if section.get('shaping'):
        v = shape_signal(v, plant_from_config(section['shaping']), h)
    return v


def harmonic_residuals(tr, T, k, window):
    """Amplitudes c_1..c_k of y over a window of whole periods."""
    t_a, t_b = window
    periods = (t_b - t_a) / T
    if periods < 1 - 1e-9 or abs(periods - round(periods)) > 1e-6:
        raise NonIntegerPeriod('window %s does not span whole periods of %g s'
                               % (window, T), periods=periods)
    a = int(round((t_a - tr.t0) / tr.h))
    b = a + int(round(round(periods) * T / tr.h))
    if a < 0 or b > tr.N:
        raise ConfigError('window %s lies outside the trace' % (window,))
    decomp = fourier_analyze(tr.y[a:b], tr.h, T, k)
    return np.asarray(decomp.coefficients[1:k + 1])


def attenuation_db(pre, post):
    """20 log10(pre/post) per harmonic; inf where post is zero."""
    pre = np.asarray(pre, dtype=float)
    post = np.asarray(post, dtype=float)
    with np.errstate(divide='ignore'):
        return 20.0 * np.log10(pre / post)


def write_trace_csv(path, tr):
    with open(path, 'w', newline='') as out:
        writer = csv.writer(out)
        writer.writerow(['t', 'r', 'd', 'u', 'y', 'y_m'])
        for row in zip(tr.t, tr.r, tr.d, tr.u, tr.y, tr.ym):
            writer.writerow(['%.6f' % row[0]] + ['%.12g' % v for v in row[1:]])
