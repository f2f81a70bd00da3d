import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, expm_frechet

from clgd.solvers.lie import hat, se3_exp, se3_left_jacobian, se3_log, so3_log, xi_gradient


def _twist(xi):
    A = np.zeros((4, 4))
    A[:3, :3] = hat(xi[:3])
    A[:3, 3] = xi[3:]
    return A


def test_zero():
    R, t = se3_exp(np.zeros(6))
    assert np.array_equal(R, np.eye(3)) and np.array_equal(t, np.zeros(3))


def test_quarter_turn_about_z():
    R, _ = se3_exp([0, 0, np.pi / 2, 0, 0, 0])
    assert np.allclose(R @ [1.0, 0, 0], [0, 1.0, 0], atol=1e-15)


def test_invalid_xi():
    with pytest.raises(ValueError):
        se3_exp([0, 0, np.nan, 0, 0, 0])
    with pytest.raises(ValueError):
        se3_exp([0, 0, 0])


@pytest.mark.parametrize("scale", [1e-9, 1e-7, 1e-4, 0.3, 1.5, 3.0])
def test_matches_matrix_exponential(scale, rng):
    for _ in range(10):
        xi = rng.normal(size=6) * scale
        T = expm(_twist(xi))
        R, t = se3_exp(xi)
        assert np.allclose(R, T[:3, :3], atol=1e-14)
        assert np.allclose(t, T[:3, 3], atol=1e-14)


def test_orthonormal_many(rng):
    xis = rng.normal(size=(10_000, 6)) * rng.uniform(0, 4, size=(10_000, 1))
    worst = 0.0
    for xi in xis:
        R, _ = se3_exp(xi)
        worst = max(worst, np.abs(R.T @ R - np.eye(3)).max(), abs(np.linalg.det(R) - 1))
    assert worst < 1e-9


@settings(max_examples=300, deadline=None)
@given(
    axis=st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda a: np.linalg.norm(a) > 1e-3),
    angle=st.floats(0, np.pi - 1e-3),
    rho=st.tuples(*[st.floats(-5, 5)] * 3),
)
def test_log_exp_round_trip(axis, angle, rho):
    omega = np.asarray(axis) / np.linalg.norm(axis) * angle
    xi = np.concatenate([omega, rho])
    assert np.allclose(se3_log(*se3_exp(xi)), xi, atol=1e-8, rtol=0)


def test_log_near_pi(rng):
    for _ in range(50):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        omega = n * (np.pi - 10 ** rng.uniform(-7, -3))
        assert np.allclose(so3_log(se3_exp(np.r_[omega, 0, 0, 0])[0]), omega, atol=1e-8)


@pytest.mark.parametrize("scale", [0.0, 1e-5, 5e-3, 0.05, 1.0, 2.8])
def test_left_jacobian_against_frechet_derivative(scale, rng):
    xi = rng.normal(size=6) * scale
    J = se3_left_jacobian(xi)
    T = expm(_twist(xi))
    Tinv = np.linalg.inv(T)
    for i in range(6):
        e = np.zeros(6)
        e[i] = 1.0
        _, D = expm_frechet(_twist(xi), _twist(e))
        assert np.allclose(D @ Tinv, _twist(J @ e), atol=1e-12)


def test_xi_gradient_finite_differences(rng):
    pts = rng.normal(size=(30, 3))
    target = rng.normal(size=(30, 3))

    def loss(xi):
        R, t = se3_exp(xi)
        y = pts @ R.T + t
        return 0.5 * np.sum((y - target) ** 2), y - target, y

    for _ in range(5):
        xi = rng.normal(size=6)
        _, g, y = loss(xi)
        analytic = xi_gradient(xi, y, g)
        h = 1e-6
        fd = np.array([(loss(xi + h * e)[0] - loss(xi - h * e)[0]) / (2 * h) for e in np.eye(6)])
        assert np.allclose(analytic, fd, rtol=1e-6, atol=1e-6)
