# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Frequency-domain and spectral checks of a designed IMC loop: ideal
#  and perturbed sensitivity, grid based H-infinity estimates, the
#  small-gain robustness test and a quasi-polynomial root scan over
#  rectangles of the complex plane.
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
from fractions import Fraction

import numpy as np
import numpy.polynomial.polynomial as P
from tqdm import tqdm

from perimc.errors import GridTooCoarse, ConfigError, VerificationFailed
from perimc.numkernel import eigenvalues
from perimc.plantmodel import (require_valid, eval_plant, perturb_plant,
                               polynomial_roots)
from perimc.filtersynth import filter_response, filter_factors

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
DENOMINATOR_FLOOR = 1e-12
ROOT_TOL = 1e-8
CHUNK_ROWS = 200


def _snap_delay(d):
    """Snap a delay to a nearby short fraction so that equal sums of
    delays compare equal."""
    d = float(d)
    frac = float(Fraction(d).limit_denominator(10 ** 6))
    return frac if abs(frac - d) <= 1e-12 * max(1.0, d) else d


def _root_product(s, roots):
    """prod_i (s - r_i) and its derivative, by the product rule."""
    val = np.ones(s.shape, dtype=complex)
    der = np.zeros(s.shape, dtype=complex)
    for r in roots:
        der = der * (s - r) + val
        val = val * (s - r)
    return val, der


@dataclass(frozen=True, eq=False)
class QuasiPolynomial:
    """q(s) = sum_j c_j(s) prod_i (s - r_ji) e^{-s d_j} with ascending c_j.

    A term is (coefficients, delay) or (coefficients, delay, roots). The
    roots keep high-order factors out of monomial form. Terms with
    (numerically) equal delays and the same roots are merged and
    vanishing terms dropped on construction. The retarded-type check
    covers the terms without roots; factored pairs such as p(s) - z(s)
    cancel leading orders that their term degrees do not show.
    """
    terms: tuple

    def __post_init__(self):
        merged = []
        for term in self.terms:
            coeffs, delay = term[0], term[1]
            roots = np.asarray(term[2] if len(term) > 2 else (),
                               dtype=complex).ravel()
            if delay < 0:
                raise ConfigError('delays must be nonnegative, got %s' % delay)
            key = _snap_delay(delay)
            c = np.atleast_1d(np.asarray(coeffs, dtype=float))
            for i, (d, r, other, ref) in enumerate(merged):
                if abs(d - key) <= 1e-9 * max(1.0, key) and \
                        r.shape == roots.shape and np.array_equal(r, roots):
                    merged[i] = (d, r, P.polyadd(other, c),
                                 max(ref, float(np.max(np.abs(c)))))
                    break
            else:
                merged.append((key, roots, c, float(np.max(np.abs(c)))))
        terms = []
        for delay, roots, c, ref in sorted(merged, key=lambda t: t[0]):
            nz = np.nonzero(np.abs(c) > 1e-14 * ref)[0]
            if nz.size:
                terms.append((c[:nz[-1] + 1], delay, roots))
        if not terms or terms[0][1] != 0.0:
            raise ConfigError('quasi-polynomial needs a nonzero delay-free term')
        lead = max(len(c) - 1 + len(r) for c, d, r in terms if d == 0.0)
        if any(len(c) - 1 > lead for c, d, r in terms if d > 0 and not len(r)):
            raise ConfigError('quasi-polynomial is not of retarded type: the '
                              'delay-free term must have the highest degree')
        object.__setattr__(self, 'terms', tuple(terms))

    @property
    def degree(self):
        return max(len(c) - 1 + len(r) for c, d, r in self.terms if d == 0.0)

    @property
    def delays(self):
        return tuple(sorted(set(d for _, d, _ in self.terms)))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for c, d, roots in self.terms:
            out += _root_product(s, roots)[0] * P.polyval(s, c) * np.exp(-s * d)
        return out

    def derivative(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for c, d, roots in self.terms:
            val, der = _root_product(s, roots)
            poly = P.polyval(s, c)
            out += (der * poly + val * (P.polyval(s, P.polyder(c)) - d * poly)) * \
                np.exp(-s * d)
        return out

    def scale(self, s):
        """Magnitude the evaluation rounds against:
        sum of prod|s - r| sum|c_i||s|^i |e^{-sd}|."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape)
        for c, d, roots in self.terms:
            out += np.abs(_root_product(s, roots)[0]) * \
                P.polyval(np.abs(s), np.abs(c)) * np.abs(np.exp(-s * d))
        return out


@dataclass(frozen=True)
class SpectrumRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    step: float

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ConfigError('spectrum region is empty')
        width = min(self.re_max - self.re_min, self.im_max - self.im_min)
        if not 0 < self.step < width / 10:
            raise ConfigError('grid step %s must be positive and below a tenth '
                              'of the smallest region width %s' %
                              (self.step, width))

    def contains(self, s, tol=0.0):
        return (self.re_min - tol <= s.real <= self.re_max + tol and
                self.im_min - tol <= s.imag <= self.im_max + tol)


@dataclass(frozen=True)
class RootScan:
    """Roots of a scan plus the argument-principle cross-check."""
    roots: np.ndarray
    expected: int
    found: int

    @property
    def consistent(self):
        return self.expected == self.found


@dataclass(frozen=True, eq=False)
class MismatchSpec:
    """True plant G_s e^{-s tau_s} next to the loop model G_m e^{-s tau_m}."""
    plant: object
    model: object

    def __post_init__(self):
        require_valid(self.plant)
        require_valid(self.model)


def ideal_sensitivity(f, tau, theta, omega):
    """S(jw) = 1 - F(jw) e^{-jw (tau + theta)}."""
    omega = np.asarray(omega, dtype=float)
    return 1.0 - filter_response(f, omega) * np.exp(-1j * omega * (tau + theta))


def controller_transfer(c, s):
    """Q(s) = F(s) b(s)/a(s) from the filter and the design plant."""
    s = np.asarray(s, dtype=complex)
    model = c.filter.model
    F = np.array([model.response(x) for x in s.ravel()]).reshape(s.shape)
    Q = F * P.polyval(s, c.plant.denominator) / P.polyval(s, c.plant.numerator)
    return complex(Q) if Q.ndim == 0 else Q


def mismatch_response(m, omega):
    """Delta(jw) = G_s e^{-jw tau_s} - G_m e^{-jw tau_m}."""
    s = 1j * np.asarray(omega, dtype=float)
    return eval_plant(m.plant, s) - eval_plant(m.model, s)


def _loop_terms(c, m, omega):
    omega = np.asarray(omega, dtype=float)
    s = 1j * omega
    Qd = controller_transfer(c, s) * np.exp(-s * c.theta)
    Gm = eval_plant(m.model, s)
    Gs = eval_plant(m.plant, s)
    return Qd, Gm, Gs


def perturbed_sensitivity(c, m, omega, with_flags=False):
    """S = (1 - G_m Q e^{-s theta}) / (1 + Delta Q e^{-s theta}).

    With with_flags=True a boolean array marks frequencies where the
    denominator magnitude falls below 1e-12.
    """
    Qd, Gm, Gs = _loop_terms(c, m, omega)
    den = 1.0 + (Gs - Gm) * Qd
    S = (1.0 - Gm * Qd) / den
    if with_flags:
        return S, np.abs(den) < DENOMINATOR_FLOOR
    return S


def reference_response(c, m, omega):
    """Y/R = G_s Q e^{-s theta} / (1 + Delta Q e^{-s theta})."""
    Qd, Gm, Gs = _loop_terms(c, m, omega)
    return Gs * Qd / (1.0 + (Gs - Gm) * Qd)


def _magnitudes(responder, omega):
    vals = np.asarray(responder(omega), dtype=complex)
    return np.abs(vals) * np.ones_like(omega)


def hinf_grid(responder, band, rel_tol=1e-3, points=2000):
    """Largest |responder(w)| on a band, a lower bound of the H-inf norm.

    A log-spaced sweep of at least 2000 points is refined by golden
    section search in log w around its five largest local maxima.

    Returns
    -------
    norm : float
    omega : float
        Location of the maximum in rad/s.
    """
    lo, hi = float(band[0]), float(band[1])
    if not 0 < lo < hi:
        raise ConfigError('frequency band must satisfy 0 < lo < hi, got %s'
                          % (band,))
    omega = np.logspace(np.log10(lo), np.log10(hi), max(int(points), 2000))
    mag = _magnitudes(responder, omega)
    left = np.concatenate([[-np.inf], mag[:-1]])
    right = np.concatenate([mag[1:], [-np.inf]])
    peaks = np.nonzero((mag >= left) & (mag >= right))[0]
    peaks = peaks[np.argsort(-mag[peaks], kind='stable')][:5]
    best = int(np.argmax(mag))
    norm, arg = float(mag[best]), float(omega[best])

    def value(x):
        return float(_magnitudes(responder, np.array([np.exp(x)]))[0])

    for i in peaks:
        a = np.log(omega[max(i - 1, 0)])
        b = np.log(omega[min(i + 1, len(omega) - 1)])
        x1 = b - GOLDEN * (b - a)
        x2 = a + GOLDEN * (b - a)
        f1, f2 = value(x1), value(x2)
        while b - a > rel_tol:
            if f1 >= f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - GOLDEN * (b - a)
                f1 = value(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + GOLDEN * (b - a)
                f2 = value(x2)
        for x, fx in ((x1, f1), (x2, f2)):
            if fx > norm:
                norm, arg = fx, float(np.exp(x))
    return norm, arg


def small_gain_check(c, m, band, rel_tol=1e-3):
    """Sufficient robust-stability test |Delta(jw) Q(jw)| < 1.

    A margin above one does not prove instability.
    """
    margin, _ = hinf_grid(lambda w: mismatch_response(m, w) *
                          controller_transfer(c, 1j * w), band, rel_tol)
    return margin, bool(margin < 1.0)


def frequency_sweep(responder, omega):
    """Rows (w, |S|, angle S) for plotting."""
    omega = np.asarray(omega, dtype=float)
    vals = np.asarray(responder(omega), dtype=complex) * np.ones_like(omega)
    return np.column_stack([omega, np.abs(vals), np.angle(vals)])


def write_sweep_csv(path, columns):
    """columns: ordered mapping of header -> equal-length sequences."""
    keys = list(columns)
    with open(path, 'w', newline='') as out:
        writer = csv.writer(out)
        writer.writerow(keys)
        for row in zip(*(columns[k] for k in keys)):
            writer.writerow(['%.12g' % v for v in row])


def write_roots_csv(path, rows):
    """rows: iterable of (kind, complex root)."""
    with open(path, 'w', newline='') as out:
        writer = csv.writer(out)
        writer.writerow(['kind', 'Re', 'Im'])
        for kind, r in rows:
            writer.writerow([kind, '%.12g' % r.real, '%.12g' % r.imag])


def ideal_zero_polynomial(f, tau, theta):
    """p(s) (1 - e^{-sT}) + z(s) e^{-sT} with T = tau + theta.

    p and z stay root products; z vanishes exactly at 0 and +-jw_i.
    """
    poles, zeros = filter_factors(f)
    T = tau + theta
    return QuasiPolynomial((([1.0], 0.0, poles), ([-1.0], T, poles),
                            ([1.0], T, zeros)))


def ideal_poles(f):
    return eigenvalues(f.A)


def _same_plant(a, b):
    return (len(a.numerator) == len(b.numerator) and
            len(a.denominator) == len(b.denominator) and
            np.allclose(a.numerator, b.numerator, rtol=1e-12, atol=0) and
            np.allclose(a.denominator, b.denominator, rtol=1e-12, atol=0))


def _factored(*polys):
    """Leading coefficient and roots of a product of ascending polynomials."""
    lead, roots = 1.0, []
    for c in polys:
        c = np.trim_zeros(np.asarray(c, dtype=float), 'b')
        lead *= c[-1]
        roots.extend(polynomial_roots(c))
    return lead, np.array(roots, dtype=complex)


def perturbed_char_polynomial(c, m):
    """Numerator of 1 + Delta Q e^{-s theta} after clearing denominators.

    Q = (p - z) b_c / (p a_c) is taken in product form from the filter
    factors and the design plant, every polynomial kept as its roots. In
    the ideal configuration the result is p(s) a(s); the plant modes
    hidden in the loop are left out.
    """
    poles, zeros = filter_factors(c.filter)
    a_c, b_c = c.plant.numerator, c.plant.denominator
    a_s, b_s = m.plant.numerator, m.plant.denominator
    a_m, b_m = m.model.numerator, m.model.denominator
    theta = c.theta
    if _same_plant(m.model, c.plant):
        if _same_plant(m.plant, m.model) and \
                abs(m.plant.tau - m.model.tau) <= 1e-12 * max(1.0, m.model.tau):
            g, r = _factored(a_c)
            return QuasiPolynomial((([g], 0.0, np.concatenate([poles, r])),))
        lead = _factored(a_c, b_s)
        early = _factored(a_s, b_c)
        late = _factored(a_c, b_s)
    else:
        lead = _factored(a_c, b_s, b_m)
        early = _factored(b_c, a_s, b_m)
        late = _factored(b_c, a_m, b_s)
    d_s, d_m = m.plant.tau + theta, m.model.tau + theta
    terms = [([lead[0]], 0.0, np.concatenate([poles, lead[1]]))]
    # (p - z) X e^{-sd} as two root products
    for (g, r), d in ((early, d_s), ((-late[0], late[1]), d_m)):
        terms.append(([g], d, np.concatenate([poles, r])))
        terms.append(([-g], d, np.concatenate([zeros, r])))
    return QuasiPolynomial(tuple(terms))


def _edge_crossings(x0, x1, y0, y1, v):
    """Zero crossings of the bilinear corner values v on the cell edges.
    v is ordered (x0,y0), (x1,y0), (x0,y1), (x1,y1)."""
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    vals = [v[0], v[1], v[3], v[2]]
    pts = []
    for i in range(4):
        (xa, ya), (xb, yb) = corners[i], corners[(i + 1) % 4]
        va, vb = vals[i], vals[(i + 1) % 4]
        if va == vb:
            continue
        if va * vb <= 0:
            t = va / (va - vb)
            pts.append((xa + t * (xb - xa), ya + t * (yb - ya)))
    return pts


def _cell_seed(x0, x1, y0, y1, re, im):
    """Intersection of the interpolated Re q = 0 and Im q = 0 segments,
    or the cell centre when they do not meet inside the cell."""
    centre = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    pr = _edge_crossings(x0, x1, y0, y1, re)
    pi = _edge_crossings(x0, x1, y0, y1, im)
    if len(pr) < 2 or len(pi) < 2:
        return centre
    (ax, ay), (bx, by) = pr[0], pr[1]
    (cx, cy), (dx, dy) = pi[0], pi[1]
    M = np.array([[bx - ax, cx - dx], [by - ay, cy - dy]])
    if abs(np.linalg.det(M)) < 1e-300:
        return centre
    t, u = np.linalg.solve(M, [cx - ax, cy - ay])
    if -0.1 <= t <= 1.1 and -0.1 <= u <= 1.1:
        return complex(ax + t * (bx - ax), ay + t * (by - ay))
    return centre


def _newton(q, s, maxit=60):
    """Damped Newton on q from seed s; returns (root, converged)."""
    val = complex(q(s))
    for _ in range(maxit):
        der = complex(q.derivative(s))
        if der == 0:
            break
        step = val / der
        lam = 1.0
        while True:
            trial = s - lam * step
            tval = complex(q(trial))
            if abs(tval) < abs(val) or lam < 1e-3:
                break
            lam *= 0.5
        s, val = trial, tval
        if abs(lam * step) <= 1e-15 * max(1.0, abs(s)):
            break
    return s, abs(val) < ROOT_TOL * float(q.scale(s))


def _boundary(region):
    """Counterclockwise corner list of the region rectangle."""
    return [complex(region.re_min, region.im_min),
            complex(region.re_max, region.im_min),
            complex(region.re_max, region.im_max),
            complex(region.re_min, region.im_max)]


def _phase_step(q, a, b, va, vb, depth=0):
    d = np.angle(vb / va)
    if abs(d) <= np.pi / 3 or depth > 30:
        return d
    mid = 0.5 * (a + b)
    vm = complex(q(mid))
    return (_phase_step(q, a, mid, va, vm, depth + 1) +
            _phase_step(q, mid, b, vm, vb, depth + 1))


def argument_principle_count(q, region, spacing=None):
    """Number of zeros inside the region from the winding of q along its
    boundary, sampled at step/4 with midpoint refinement of large jumps."""
    spacing = region.step / 4 if spacing is None else spacing
    corners = _boundary(region)
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        n = max(int(np.ceil(abs(b - a) / spacing)), 1)
        pts = a + (b - a) * np.linspace(0.0, 1.0, n + 1)
        vals = q(pts)
        if np.any(vals == 0):
            raise GridTooCoarse('a zero lies on the region boundary; move '
                                'the boundary', region=str(region))
        steps = np.angle(vals[1:] / vals[:-1])
        for i in np.nonzero(np.abs(steps) > np.pi / 3)[0]:
            steps[i] = _phase_step(q, pts[i], pts[i + 1], vals[i], vals[i + 1])
        total += float(np.sum(steps))
    return int(round(total / (2 * np.pi)))


def _sign_change(part):
    stack = np.stack([part[:-1, :-1], part[:-1, 1:], part[1:, :-1], part[1:, 1:]])
    return (stack.max(axis=0) >= 0) & (stack.min(axis=0) <= 0)


def _candidate_cells(q, re, im, progress=False):
    """Cells whose corners see sign changes of both Re q and Im q."""
    seeds = []
    starts = range(0, len(im) - 1, CHUNK_ROWS)
    for start in tqdm(starts, disable=not progress, desc='grid scan'):
        rows = im[start:min(start + CHUNK_ROWS + 1, len(im))]
        S = re[None, :] + 1j * rows[:, None]
        Q = q(S)
        cells = _sign_change(Q.real) & _sign_change(Q.imag)
        for i, j in zip(*np.nonzero(cells)):
            v = Q[i:i + 2, j:j + 2]
            cr = [v[0, 0].real, v[0, 1].real, v[1, 0].real, v[1, 1].real]
            ci = [v[0, 0].imag, v[0, 1].imag, v[1, 0].imag, v[1, 1].imag]
            seeds.append(_cell_seed(re[j], re[j + 1], rows[i], rows[i + 1],
                                    cr, ci))
    return seeds


def qp_roots(q, region, mirror=False, check=True, progress=False):
    """Roots of a retarded quasi-polynomial inside a rectangle.

    The grid mapping follows the zero-level contours of Re q and Im q;
    seeds at their intersections are polished with damped Newton and
    deduplicated within step/2. A region starting at Im = 0 is scanned
    from -2 step so that real roots are interior, and only roots with
    Im >= 0 are kept; mirror=True adds their conjugates.

    Returns
    -------
    RootScan
    """
    step = region.step
    scan = region
    if region.im_min == 0:
        scan = SpectrumRegion(region.re_min, region.re_max, -2 * step,
                              region.im_max, step)
    re = np.linspace(scan.re_min, scan.re_max,
                     int(np.ceil((scan.re_max - scan.re_min) / step)) + 1)
    im = np.linspace(scan.im_min, scan.im_max,
                     int(np.ceil((scan.im_max - scan.im_min) / step)) + 1)
    roots = []
    for seed in _candidate_cells(q, re, im, progress):
        root, ok = _newton(q, seed)
        if not ok or not scan.contains(root):
            continue
        if all(abs(root - r) > step / 2 for r in roots):
            roots.append(root)
    found = len(roots)
    expected = argument_principle_count(q, scan) if check else found
    if check and expected != found:
        raise GridTooCoarse('argument principle counts %d zeros, the grid '
                            'found %d; refine the step below %g' %
                            (expected, found, step), expected=expected,
                            found=found, step=step)
    if scan is not region:
        kept = []
        for r in roots:
            axis = 1e-9 * max(1.0, abs(r))
            if r.imag >= -axis:
                kept.append(complex(r.real, 0.0) if abs(r.imag) <= axis else r)
        roots = kept
    if mirror:
        roots = roots + [r.conjugate() for r in roots if r.imag > 0]
    roots = np.array(sorted(roots, key=lambda r: (r.imag, r.real)), dtype=complex)
    return RootScan(roots, expected, found)


def perturbed_char_roots(c, m, region, **kwargs):
    return qp_roots(perturbed_char_polynomial(c, m), region, **kwargs)


def spectral_abscissa(roots):
    roots = np.asarray(roots)
    return float(np.max(roots.real)) if roots.size else float('-inf')


def critical_mismatch_gain(c, model, time_constant, region, lo=0.5, hi=10.0,
                           tol=1e-3):
    """Bisection on g in G_m g/(time_constant s + 1) for the gain where
    the rightmost root of the loop crosses the imaginary axis."""

    def stable(g):
        m = MismatchSpec(perturb_plant(model, g, time_constant), model)
        return spectral_abscissa(perturbed_char_roots(c, m, region).roots) < 0

    if not stable(lo):
        raise VerificationFailed('loop is already unstable at gain %g' % lo,
                                 gain=lo)
    if stable(hi):
        raise VerificationFailed('loop is still stable at gain %g' % hi,
                                 gain=hi)
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
