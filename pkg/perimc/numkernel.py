# -*- coding: utf-8 -*-

#######################################################################
# Copyright (C) 2026 perimc authors
#
#  Dense linear algebra kernels used by the other perimc modules:
#  checked linear solves, eigenvalues from the real Schur form, the
#  continuous algebraic Riccati equation and ZOH discretization.
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
import scipy.linalg as la

from perimc.errors import (NonFiniteInput, SingularMatrix, NoConvergence,
                           NotStabilizable, ResidualTooLarge, PoleHit)

SINGULAR_PIVOT = 1e-13
ILL_CONDITIONED = 1e12
SOLVE_RESIDUAL = 1e-10
CARE_RESIDUAL = 1e-8


def as_matrix(x, name='matrix', allowComplex=False):
    """Return x as a finite 2-d float (or complex) array."""
    dtype = complex if allowComplex and np.iscomplexobj(x) else float
    arr = np.atleast_2d(np.asarray(x, dtype=dtype))
    if arr.ndim != 2:
        raise ValueError('%s must be two-dimensional, got shape %s' %
                         (name, arr.shape))
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput('%s contains NaN or Inf entries' % name)
    return arr


@dataclass(frozen=True)
class ConditionReport:
    condition: float
    residual: float

    @property
    def ill_conditioned(self):
        return self.condition > ILL_CONDITIONED


@dataclass(frozen=True)
class StateSpaceModel:
    """SISO realization (A, B, C, D).

    A is n x n, B is n x 1, C is 1 x n and D a scalar. n may be zero, in
    which case the model is the static gain D.
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float = 0.0

    def __post_init__(self):
        A = (np.atleast_2d(np.asarray(self.A, dtype=float))
             if np.size(self.A) else np.zeros((0, 0)))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, 1)
        C = np.asarray(self.C, dtype=float).reshape(1, n)
        for name, arr in (('A', A), ('B', B), ('C', C)):
            if not np.all(np.isfinite(arr)):
                raise NonFiniteInput('%s contains NaN or Inf entries' % name)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'C', C)
        object.__setattr__(self, 'D', float(self.D))

    @property
    def order(self):
        return self.A.shape[0]

    def response(self, s):
        """C (sI - A)^-1 B + D at a complex point s."""
        if self.order == 0:
            return complex(self.D)
        x = resolvent(self.A, s, self.B)
        return complex((self.C @ x)[0, 0]) + self.D

    def poles(self):
        return eigenvalues(self.A)


def _relative_residual(A, x, b):
    r = A @ x - b
    denom = (np.linalg.norm(A, np.inf) * np.linalg.norm(x, np.inf) +
             np.linalg.norm(b, np.inf))
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(r, np.inf) / denom)


def solve_linear(A, b):
    """Solve A x = b for square nonsingular A.

    Parameters
    ----------
    A : (n, n) array_like, real or complex
    b : (n,) or (n, k) array_like

    Returns
    -------
    x : ndarray shaped like b
    report : ConditionReport
        1-norm condition estimate and relative residual of the solution.
    """
    A = as_matrix(A, 'A', allowComplex=True)
    b = np.asarray(b)
    vector = b.ndim == 1
    b2 = b.reshape(-1, 1) if vector else b
    if A.shape[0] != A.shape[1]:
        raise ValueError('solve_linear needs a square matrix, got %s '
                         '(least squares is not supported)' % (A.shape,))
    if b2.shape[0] != A.shape[0]:
        raise ValueError('right-hand side has %d rows, matrix has %d' %
                         (b2.shape[0], A.shape[0]))
    if not np.all(np.isfinite(b2)):
        raise NonFiniteInput('right-hand side contains NaN or Inf entries')
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        raise SingularMatrix('matrix is identically zero', pivot=0.0)
    lu, piv = la.lu_factor(A, check_finite=False)
    pivot = float(np.min(np.abs(np.diag(lu))))
    if pivot < SINGULAR_PIVOT * scale:
        raise SingularMatrix('pivot %.3e below %.0e x scale' %
                             (pivot, SINGULAR_PIVOT), pivot=pivot,
                             scale=float(scale))
    x = la.lu_solve((lu, piv), b2, check_finite=False)
    residual = _relative_residual(A, x, b2)
    if residual > SOLVE_RESIDUAL:
        # one step of iterative refinement
        x = x + la.lu_solve((lu, piv), b2 - A @ x, check_finite=False)
        residual = _relative_residual(A, x, b2)
        if residual > SOLVE_RESIDUAL:
            raise ResidualTooLarge('linear solve residual %.3e' % residual,
                                   residual=residual)
    condition = float(np.abs(np.linalg.cond(A, 1)))
    report = ConditionReport(condition=condition, residual=residual)
    return (x.ravel() if vector else x), report


def resolvent(A, s, B):
    """(sI - A)^-1 B without forming the inverse."""
    n = A.shape[0]
    M = s * np.eye(n) - A
    lu, piv = la.lu_factor(M, check_finite=False)
    pivot = np.min(np.abs(np.diag(lu)))
    if pivot < SINGULAR_PIVOT * max(np.max(np.abs(M)), 1.0):
        raise PoleHit('s = %s is numerically a pole' % s, s=str(s))
    return la.lu_solve((lu, piv), B, check_finite=False)


def real_schur(A, sort=None):
    """Real Schur form A = Z T Z^T, optionally ordered.

    Returns (T, Z, sdim); sdim counts the leading eigenvalues selected by
    `sort` (0 without sorting).
    """
    A = as_matrix(A, 'A')
    if A.shape[0] != A.shape[1]:
        raise ValueError('real_schur needs a square matrix')
    try:
        if sort is None:
            T, Z = la.schur(A, output='real')
            sdim = 0
        else:
            T, Z, sdim = la.schur(A, output='real', sort=sort)
    except la.LinAlgError as exc:
        raise NoConvergence('QR iteration did not converge: %s' % exc,
                            size=A.shape[0])
    return T, Z, int(sdim)


def schur_eigenvalues(T):
    """Eigenvalues read off the 1x1 and 2x2 diagonal blocks of T."""
    n = T.shape[0]
    out = []
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            a, b, c, d = T[i, i], T[i, i + 1], T[i + 1, i], T[i + 1, i + 1]
            mean = 0.5 * (a + d)
            root = np.sqrt(complex(0.25 * (a - d) ** 2 + b * c))
            if root.imag < 0:
                root = -root
            out.extend([mean + root, mean - root])
            i += 2
        else:
            out.append(complex(T[i, i]))
            i += 1
    return np.array(out, dtype=complex)


def eigenvalues(A):
    A = as_matrix(A, 'A') if np.size(A) else np.zeros((0, 0))
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    T, _, _ = real_schur(A)
    return schur_eigenvalues(T)


def is_hurwitz(A, margin=0.0):
    eigs = eigenvalues(A)
    return bool(eigs.size == 0 or np.max(eigs.real) < -margin)


def care_residual(A, B, Q, R, P):
    G = B @ la.solve(R, B.T, assume_a='pos')
    return float(np.linalg.norm(A.T @ P + P @ A - P @ G @ P + Q, np.inf))


def care_solve(A, B, Q, R, maxRefine=20):
    """Stabilizing solution of A'P + PA - P B R^-1 B' P + Q = 0.

    The stable invariant subspace of the Hamiltonian is taken from an
    ordered real Schur form; Newton-Kleinman steps polish P when the
    residual is above 1e-8 (1 + |P|^2).

    Parameters
    ----------
    A : (n, n) array_like
    B : (n, m) array_like
    Q : (n, n) array_like, symmetric positive semidefinite
    R : (m, m) array_like or scalar, symmetric positive definite
    maxRefine : int
        Cap on Newton-Kleinman iterations.

    Returns
    -------
    P : (n, n) ndarray, symmetric
    """
    A = as_matrix(A, 'A')
    n = A.shape[0]
    B = as_matrix(B, 'B').reshape(n, -1)
    Q = as_matrix(Q, 'Q')
    R = as_matrix(R, 'R')
    RinvBt = la.solve(R, B.T, assume_a='pos')
    G = B @ RinvBt
    H = np.block([[A, -G], [-Q, -A.T]])
    T, Z, sdim = real_schur(H, sort='lhp')
    if sdim != n:
        raise NotStabilizable('Hamiltonian has %d stable eigenvalues, '
                              'expected %d' % (sdim, n), stable=sdim, n=n)
    U11, U21 = Z[:n, :n], Z[n:, :n]
    try:
        Pt, _ = solve_linear(U11.T, U21.T)
    except SingularMatrix as exc:
        raise NotStabilizable('stable subspace is not a graph: %s' %
                              exc.message, **exc.details)
    P = 0.5 * (Pt.T + Pt)

    def tol(X):
        return CARE_RESIDUAL * (1.0 + np.linalg.norm(X, np.inf) ** 2)

    residual = care_residual(A, B, Q, R, P)
    steps = 0
    while residual > tol(P) and steps < maxRefine:
        K = RinvBt @ P
        Ak = A - B @ K
        P = la.solve_continuous_lyapunov(Ak.T, -(Q + K.T @ R @ K))
        P = 0.5 * (P + P.T)
        residual = care_residual(A, B, Q, R, P)
        steps += 1
    if residual > tol(P):
        raise ResidualTooLarge('Riccati residual %.3e after %d Newton steps'
                               % (residual, steps), residual=residual,
                               steps=steps)
    if not is_hurwitz(A - G @ P):
        raise NotStabilizable('closed loop A - BK is not Hurwitz')
    return P


def zoh_discretize(A, B, h):
    """Zero-order-hold discretization via the augmented exponential.

    expm([[A, B], [0, 0]] h) = [[Ad, Bd], [0, I]].
    """
    if h < 0:
        raise ValueError('sample period must be nonnegative, got %s' % h)
    A = (np.atleast_2d(np.asarray(A, dtype=float))
         if np.size(A) else np.zeros((0, 0)))
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise NonFiniteInput('A or B contains NaN or Inf entries')
    m = B.shape[1]
    M = np.zeros((n + m, n + m))
    M[:n, :n] = A * h
    M[:n, n:] = B * h
    E = la.expm(M)
    return E[:n, :n], E[:n, n:]


def markov_parameters(A, B, C, count):
    """C A^r B for r = 0..count-1."""
    out = []
    v = np.asarray(B, dtype=float)
    for _ in range(count):
        out.append(float((C @ v).ravel()[0]))
        v = A @ v
    return np.array(out)


def pbh_minimal(A, B, C, tol=1e-10):
    """PBH rank test for controllability and observability.

    Returns (controllable, observable) booleans; each eigenvalue lam must
    give sigma_min([A - lam I, B]) and sigma_min([A - lam I; C]) above
    tol times the largest singular value.
    """
    n = A.shape[0]
    ctrb = obsv = True
    for lam in eigenvalues(A):
        M = A - lam * np.eye(n)
        sc = la.svdvals(np.hstack([M, B]))
        so = la.svdvals(np.vstack([M, C]))
        ctrb = ctrb and sc[n - 1] > tol * sc[0]
        obsv = obsv and so[n - 1] > tol * so[0]
    return bool(ctrb), bool(obsv)


def stable_test_points(count, scale=1.0, seed=0):
    """Random points in the open left half-plane for transfer checks."""
    rng = np.random.default_rng(seed)
    re = -rng.uniform(0.05, 1.0, count) * scale
    im = rng.uniform(-1.0, 1.0, count) * scale
    return re + 1j * im


def transfer_mismatch(model, reference, points):
    """Largest relative gap between model.response and a reference."""
    worst = 0.0
    for s in points:
        ref = reference(s)
        worst = max(worst, abs(model.response(s) - ref) / max(abs(ref), 1e-300))
    return worst
