import warnings

import numpy as np
import pytest
from scipy.linalg import companion
from numpy.testing import assert_allclose

from perimc.errors import SingularMatrix, NonFiniteInput, NotStabilizable, PoleHit
from perimc.numkernel import (StateSpaceModel, solve_linear, resolvent,
                              eigenvalues, is_hurwitz, care_solve,
                              care_residual, zoh_discretize,
                              markov_parameters, pbh_minimal,
                              stable_test_points, transfer_mismatch)


def test_solve_linear_real_and_complex():
    A = np.array([[4.0, 1.0], [2.0, 3.0]])
    x, report = solve_linear(A, [1.0, 2.0])
    assert_allclose(A @ x, [1.0, 2.0], atol=1e-14)
    assert report.residual <= 1e-10
    assert not report.ill_conditioned

    Ac = A + 1j * np.eye(2)
    xc, _ = solve_linear(Ac, np.array([1.0, 1j]))
    assert_allclose(Ac @ xc, [1.0, 1j], atol=1e-14)


def test_solve_linear_singular_and_nonfinite():
    with pytest.raises(SingularMatrix):
        solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])
    with pytest.raises(NonFiniteInput):
        solve_linear([[1.0, np.nan], [0.0, 1.0]], [1.0, 1.0])
    with pytest.raises(ValueError):
        solve_linear(np.ones((3, 2)), np.ones(3))


def test_eigenvalues_rotation_block():
    eigs = eigenvalues([[0.0, 2.0], [-2.0, 0.0]])
    assert_allclose(sorted(eigs.imag), [-2.0, 2.0], atol=1e-12)
    assert_allclose(eigs.real, 0.0, atol=1e-12)
    assert eigenvalues(np.zeros((0, 0))).size == 0


def test_eigenvalues_match_companion_roots():
    coeffs = [1.0, 6.0, 11.0, 6.0]
    eigs = np.sort(eigenvalues(companion(coeffs)).real)
    assert_allclose(eigs, [-3.0, -2.0, -1.0], rtol=1e-10)


def test_is_hurwitz():
    assert is_hurwitz(np.diag([-1.0, -2.0]))
    assert not is_hurwitz(np.diag([-1.0, 0.0]))
    assert not is_hurwitz(np.diag([-1.0, -1e-3]), margin=1e-2)


def test_care_double_integrator():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    Q = np.eye(2)
    R = np.array([[1.0]])
    P = care_solve(A, B, Q, R)
    expected = np.array([[np.sqrt(3.0), 1.0], [1.0, np.sqrt(3.0)]])
    assert_allclose(P, expected, rtol=1e-10)
    assert care_residual(A, B, Q, R, P) < 1e-8
    assert_allclose(P, P.T)


def test_care_not_stabilizable():
    # uncontrollable mode on the imaginary axis
    with pytest.raises(NotStabilizable):
        care_solve([[0.0]], [[0.0]], [[1.0]], [[1.0]])


def test_zoh_scalar():
    Ad, Bd = zoh_discretize([[-2.0]], [[1.0]], 0.1)
    assert_allclose(Ad[0, 0], np.exp(-0.2), rtol=1e-14)
    assert_allclose(Bd[0, 0], (1.0 - np.exp(-0.2)) / 2.0, rtol=1e-12)


def test_zoh_integrator():
    Ad, Bd = zoh_discretize(np.zeros((1, 1)), [[1.0]], 0.5)
    assert_allclose(Ad, [[1.0]])
    assert_allclose(Bd, [[0.5]])


def test_resolvent_pole_hit():
    with pytest.raises(PoleHit):
        resolvent(np.diag([-1.0, -2.0]), -1.0, np.ones((2, 1)))


def test_markov_and_pbh():
    A = np.array([[0.0, 1.0], [-2.0, -3.0]])
    B = np.array([[0.0], [1.0]])
    C = np.array([[1.0, 0.0]])
    assert_allclose(markov_parameters(A, B, C, 3), [0.0, 1.0, -3.0])
    assert pbh_minimal(A, B, C) == (True, True)
    assert pbh_minimal(np.diag([-1.0, -2.0]), np.array([[1.0], [0.0]]),
                       np.array([[1.0, 1.0]])) == (False, True)


def test_state_space_response():
    model = StateSpaceModel([[-1.0]], [[1.0]], [[2.0]], 0.5)
    assert model.order == 1
    assert_allclose(model.response(1.0), 2.0 / 2.0 + 0.5)
    gain = StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)),
                           np.zeros((1, 0)), 3.0)
    assert gain.response(1j) == 3.0
    points = stable_test_points(5, 2.0, seed=1)
    assert np.all(points.real < 0)
    assert transfer_mismatch(model, lambda s: 2.0 / (s + 1.0) + 0.5,
                             points) < 1e-14


def test_solve_linear_complex_without_warnings():
    Ac = np.array([[4.0 + 1j, 1.0], [2.0, 3.0 - 2j]])
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        x, report = solve_linear(Ac, np.array([1.0, 1j]))
    assert isinstance(report.condition, float)
    assert report.condition >= 1.0
    assert_allclose(Ac @ x, [1.0, 1j], atol=1e-14)


def test_solve_linear_random_draws():
    rng = np.random.default_rng(7)
    for i in range(100):
        n = int(rng.integers(1, 9))
        A = rng.standard_normal((n, n)) + n * np.eye(n)
        b = rng.standard_normal(n)
        if i % 2:
            A = A + 1j * rng.standard_normal((n, n))
            b = b + 1j * rng.standard_normal(n)
        x, report = solve_linear(A, b)
        assert_allclose(x, np.linalg.solve(A, b), rtol=1e-10, atol=1e-12)
        assert report.residual <= 1e-12
        assert np.isfinite(report.condition)


def test_eigenvalues_similarity_invariant():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = rng.standard_normal((6, 6))
        T = np.eye(6) + 0.2 * rng.standard_normal((6, 6))
        moved = eigenvalues(T @ A @ np.linalg.inv(T))
        for e in eigenvalues(A):
            assert np.min(np.abs(moved - e)) <= 1e-8 * max(1.0, abs(e))


def test_care_random_systems():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(1, 13))
        m = int(rng.integers(1, 3))
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, m))
        Q = np.eye(n)
        R = np.eye(m)
        P = care_solve(A, B, Q, R)
        assert care_residual(A, B, Q, R, P) <= 1e-8 * (1.0 + np.linalg.norm(P, np.inf) ** 2)
        assert_allclose(P, P.T)
        assert np.min(np.linalg.eigvalsh(P)) >= -1e-10 * np.linalg.norm(P)
        assert is_hurwitz(A - B @ B.T @ P)


def test_zoh_rotation_block():
    w, h = 3.0, 0.1
    A = np.array([[0.0, w], [-w, 0.0]])
    Ad, Bd = zoh_discretize(A, [[0.0], [1.0]], h)
    assert_allclose(Ad.T @ Ad, np.eye(2), atol=1e-14)
    assert np.linalg.det(Ad) == pytest.approx(1.0, abs=1e-14)
    assert_allclose(Ad, [[np.cos(w * h), np.sin(w * h)],
                         [-np.sin(w * h), np.cos(w * h)]], atol=1e-14)
    assert_allclose(Bd.ravel(), [(1.0 - np.cos(w * h)) / w, np.sin(w * h) / w],
                    rtol=1e-12)
