"""Registration and scene-flow error metrics.

Flow accuracy follows the usual FlyingThings3D convention: a point counts as
accurate at threshold ``a`` if its end-point error is below ``a`` in absolute
terms or relative to the ground-truth flow magnitude, and as an outlier if the
error exceeds 0.3 or 10% of the magnitude. Points with zero ground-truth flow
use the absolute criteria only.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

FLOW_CONVENTION = (
    "acc_005: e<0.05 or e/|gt|<0.05; acc_01: e<0.1 or e/|gt|<0.1; "
    "outliers: e>0.3 or e/|gt|>0.1; relative tests skipped where |gt|=0"
)


@dataclass
class RegistrationError:
    re_degrees: float
    te: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FlowError:
    epe3d: float
    acc_005: float
    acc_01: float
    outliers: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_rotation(R, name: str, tol: float = 1e-6) -> np.ndarray:
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got {R.shape}")
    if np.abs(R.T @ R - np.eye(3)).max() > tol or abs(np.linalg.det(R) - 1.0) > tol:
        raise ValueError(f"{name} is not a rotation matrix (orthonormal, det 1) within {tol}")
    return R


def rotation_angle_deg(A: np.ndarray) -> float:
    c = np.clip((np.trace(A) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.degrees(np.arccos(c)))


def registration_error(R_hat, t_hat, R_gt, t_gt) -> RegistrationError:
    R_hat = _check_rotation(R_hat, "R_hat")
    R_gt = _check_rotation(R_gt, "R_gt")
    te = float(np.linalg.norm(np.asarray(t_hat, dtype=np.float64) - np.asarray(t_gt, dtype=np.float64)))
    return RegistrationError(rotation_angle_deg(R_gt.T @ R_hat), te)


def flow_error(F_hat, F_gt) -> FlowError:
    F_hat = np.asarray(F_hat, dtype=np.float64)
    F_gt = np.asarray(F_gt, dtype=np.float64)
    if F_hat.shape != F_gt.shape or F_hat.ndim != 2 or F_hat.shape[1] != 3:
        raise ValueError(f"flow shapes differ or are not (N, 3): {F_hat.shape} vs {F_gt.shape}")
    err = np.linalg.norm(F_hat - F_gt, axis=1)
    mag = np.linalg.norm(F_gt, axis=1)
    has_mag = mag > 0
    rel = np.divide(err, mag, out=np.full_like(err, np.inf), where=has_mag)
    rel_out = np.where(has_mag, rel, -np.inf)
    return FlowError(
        epe3d=float(err.mean()),
        acc_005=float(np.mean((err < 0.05) | (rel < 0.05))),
        acc_01=float(np.mean((err < 0.1) | (rel < 0.1))),
        outliers=float(np.mean((err > 0.3) | (rel_out > 0.1))),
    )
