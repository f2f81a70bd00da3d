"""Chamfer, Hausdorff and exact Earth Mover's distances.

Chamfer uses the sum of the two directed means of unsquared Euclidean
nearest-neighbor distances. EMD is the mean matched distance under the optimal
bijection of two equal-size clouds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .pcore import SpatialIndex, as_points, scatter_add

EMD_DEFAULT_CAP = 1024


@dataclass
class ChamferReport:
    value: float
    forward_mean: float
    backward_mean: float


@dataclass
class EmdReport:
    value: float
    assignment: np.ndarray  # assignment[i] = index in P2 matched to P1[i]


def _nearest(src: np.ndarray, dst: np.ndarray, workers=None):
    nb = SpatialIndex(dst, workers=workers).query(src, 1)
    return nb.indices[:, 0], nb.distances[:, 0]


def chamfer(P1, P2, workers=None) -> ChamferReport:
    p1, p2 = as_points(P1, "P1"), as_points(P2, "P2")
    _, d12 = _nearest(p1, p2, workers)
    _, d21 = _nearest(p2, p1, workers)
    fwd, bwd = float(d12.mean()), float(d21.mean())
    return ChamferReport(fwd + bwd, fwd, bwd)


def _unit_rows(diff: np.ndarray, norms: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(norms[:, None] > 0, diff / norms[:, None], 0.0)


def chamfer_gradient(P1_static, P2_moving, workers=None):
    """Chamfer value and its gradient w.r.t. ``P2_moving`` with frozen nearest neighbors."""
    p1, p2 = as_points(P1_static, "P1"), as_points(P2_moving, "P2")
    n1, n2 = p1.shape[0], p2.shape[0]
    j12, d12 = _nearest(p1, p2, workers)  # for each static point, nearest moving point
    i21, d21 = _nearest(p2, p1, workers)  # for each moving point, nearest static point
    grad = scatter_add(j12, _unit_rows(p2[j12] - p1, d12) / n1, n2)
    grad += _unit_rows(p2 - p1[i21], d21) / n2
    return float(d12.mean()) + float(d21.mean()), grad


def hausdorff(P1, P2, workers=None) -> float:
    p1, p2 = as_points(P1, "P1"), as_points(P2, "P2")
    _, d12 = _nearest(p1, p2, workers)
    _, d21 = _nearest(p2, p1, workers)
    return float(max(d12.max(), d21.max()))


def emd_exact(P1, P2, cap: int = EMD_DEFAULT_CAP) -> EmdReport:
    p1, p2 = as_points(P1, "P1"), as_points(P2, "P2")
    if p1.shape[0] != p2.shape[0]:
        raise ValueError(f"EMD needs equal-size clouds, got {p1.shape[0]} and {p2.shape[0]}")
    if p1.shape[0] > cap:
        raise ValueError(
            f"EMD on {p1.shape[0]} points exceeds the cap of {cap}; subsample both clouds or raise the cap"
        )
    cost = cdist(p1, p2)
    rows, cols = linear_sum_assignment(cost)
    assignment = np.empty(p1.shape[0], dtype=np.int64)
    assignment[rows] = cols
    return EmdReport(float(cost[rows, cols].mean()), assignment)


def emd_gradient(P1_static, P2_moving, cap: int = EMD_DEFAULT_CAP):
    """EMD value and gradient w.r.t. ``P2_moving`` with the optimal assignment frozen."""
    p1, p2 = as_points(P1_static, "P1"), as_points(P2_moving, "P2")
    rep = emd_exact(p1, p2, cap)
    inverse = np.empty_like(rep.assignment)
    inverse[rep.assignment] = np.arange(rep.assignment.shape[0])
    diff = p2 - p1[inverse]
    norms = np.sqrt(np.einsum("nc,nc->n", diff, diff))
    return rep.value, _unit_rows(diff, norms) / p2.shape[0]
