"""SE(3) exponential/logarithm with ``xi = (omega, rho)``, rotation first."""

from __future__ import annotations

import numpy as np

_SMALL = 1e-6
# below this angle the left-Jacobian coefficient series are used
_SERIES = 1e-2


def hat(w) -> np.ndarray:
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(W: np.ndarray) -> np.ndarray:
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def _so3_coeffs(theta: float):
    """``sin t / t``, ``(1 - cos t) / t^2``, ``(t - sin t) / t^3``."""
    if theta < _SMALL:
        t2 = theta * theta
        return 1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0
    s, c = np.sin(theta), np.cos(theta)
    return s / theta, (1.0 - c) / theta**2, (theta - s) / theta**3


def so3_exp(omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=np.float64)
    a, b, _ = _so3_coeffs(float(np.linalg.norm(omega)))
    W = hat(omega)
    return np.eye(3) + a * W + b * (W @ W)


def so3_left_jacobian(omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=np.float64)
    _, b, c = _so3_coeffs(float(np.linalg.norm(omega)))
    W = hat(omega)
    return np.eye(3) + b * W + c * (W @ W)


def se3_exp(xi) -> tuple[np.ndarray, np.ndarray]:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (6,) or not np.isfinite(xi).all():
        raise ValueError("xi must be a finite 6-vector")
    omega, rho = xi[:3], xi[3:]
    return so3_exp(omega), so3_left_jacobian(omega) @ rho


def so3_log(R: np.ndarray) -> np.ndarray:
    R = np.asarray(R, dtype=np.float64)
    a = 0.5 * vee(R - R.T)                       # sin(theta) * axis
    s = float(np.linalg.norm(a))
    c = 0.5 * (np.trace(R) - 1.0)
    theta = float(np.arctan2(s, c))
    if theta < _SMALL:
        return a * (1.0 + theta * theta / 6.0)
    if np.pi - theta > 1e-3:
        return theta / s * a
    # near pi the antisymmetric part vanishes; read the axis off R + R^T
    B = 0.5 * (R + R.T) - c * np.eye(3)          # (1 - cos) n n^T
    col = int(np.argmax(np.diag(B)))
    n = B[:, col] / np.sqrt(B[col, col])
    n /= np.linalg.norm(n)
    if n @ a < 0:
        n = -n
    return theta * n


def se3_log(R: np.ndarray, t) -> np.ndarray:
    omega = so3_log(R)
    rho = np.linalg.solve(so3_left_jacobian(omega), np.asarray(t, dtype=np.float64))
    return np.concatenate([omega, rho])


def _q_coeffs(theta: float):
    if theta < _SERIES:
        t2 = theta * theta
        return (
            1.0 / 6.0 - t2 / 120.0,
            1.0 / 24.0 - t2 / 720.0,
            1.0 / 120.0 - t2 / 2520.0,
        )
    s, c = np.sin(theta), np.cos(theta)
    return (
        (theta - s) / theta**3,
        (theta**2 + 2.0 * c - 2.0) / (2.0 * theta**4),
        (2.0 * theta - 3.0 * s + theta * c) / (2.0 * theta**5),
    )


def se3_left_jacobian(xi) -> np.ndarray:
    """6x6 ``J`` with ``exp(xi + d) ~= exp(J d) exp(xi)`` for small ``d``."""
    xi = np.asarray(xi, dtype=np.float64)
    omega, rho = xi[:3], xi[3:]
    c1, c2, c3 = _q_coeffs(float(np.linalg.norm(omega)))
    P, Rh = hat(omega), hat(rho)
    PR, RP = P @ Rh, Rh @ P
    PRP = PR @ P
    Q = (
        0.5 * Rh
        + c1 * (PR + RP + PRP)
        + c2 * (P @ PR + RP @ P - 3.0 * PRP)
        + c3 * (PRP @ P + P @ PRP)
    )
    Jl = so3_left_jacobian(omega)
    J = np.zeros((6, 6))
    J[:3, :3] = Jl
    J[3:, 3:] = Jl
    J[3:, :3] = Q
    return J


def transform_points(points: np.ndarray, R: np.ndarray, t: np.ndarray) -> np.ndarray:
    return points @ R.T + t


def xi_gradient(xi, moved: np.ndarray, point_grad: np.ndarray) -> np.ndarray:
    """Chain rule from per-point gradients of ``y = R(xi) p + t(xi)`` to ``d/dxi``.

    A left perturbation ``(dw, dr)`` moves ``y`` by ``dw x y + dr``, so the
    tangent gradient is ``(sum y x g, sum g)``; ``J^T`` maps it to coordinates.
    """
    tangent = np.concatenate([np.cross(moved, point_grad).sum(axis=0), point_grad.sum(axis=0)])
    return se3_left_jacobian(xi).T @ tangent
