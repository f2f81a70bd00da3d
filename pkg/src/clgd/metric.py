"""Calibrated Local Geometry Distance (CLGD).

A reference point ``q`` sees a cloud through its K nearest neighbors. Inverse
square distances weight them into a 4-vector ``g = [f | v]``: ``f`` is an
approximate unsigned distance from ``q`` to the underlying surface and ``v`` the
offset from the surface to ``q``. Two clouds are compared by the l1 difference
of their ``g`` at every reference, using the weights of the cloud that seeded
the references for both sides, and averaged with confidence ``exp(-beta d)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .pcore import Neighborhood, SpatialIndex, as_points, scatter_add
from .reference import ReferenceParams, ReferenceSet, cloud_digest, generate_references


@dataclass(frozen=True)
class ClgdParams:
    K: int = 5
    beta: float = 0.0
    epsilon: float = 1e-12
    reference: ReferenceParams = field(default_factory=ReferenceParams)
    symmetrize: bool = False

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def to_dict(self) -> dict:
        return asdict(self)


class DirectionalDistance(NamedTuple):
    f: float
    v: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.f], self.v])


@dataclass
class ClgdReport:
    value: float
    per_reference: np.ndarray | None = None
    scores: np.ndarray | None = None
    references: np.ndarray | None = None


def inverse_square_weights(dist: np.ndarray, epsilon: float = 1e-12) -> np.ndarray:
    return 1.0 / np.maximum(dist * dist, epsilon)


def _weighted_average(queries, points, nb: Neighborhood, weights):
    wsum = weights.sum(axis=1)
    f = np.einsum("mk,mk->m", weights, nb.distances) / wsum
    offsets = queries[:, None, :] - points[nb.indices]
    v = np.einsum("mk,mkc->mc", weights, offsets) / wsum[:, None]
    return f, v


def directional_distances(queries, index: SpatialIndex, K: int, weights=None, epsilon: float = 1e-12):
    """Batched ``g`` for ``(M, 3)`` queries.

    Returns ``(f, v, neighborhood, weights)``. Supplied ``weights`` (``(M, K)``)
    are applied rank-aligned to this cloud's sorted neighbors.
    """
    q = np.ascontiguousarray(queries, dtype=np.float64).reshape(-1, 3)
    nb = index.query(q, K)
    if weights is None:
        weights = inverse_square_weights(nb.distances, epsilon)
    else:
        weights = np.asarray(weights, dtype=np.float64).reshape(q.shape[0], -1)
        if weights.shape[1] != K:
            raise ValueError(f"expected {K} weights per query, got {weights.shape[1]}")
        if (weights < 0).any():
            raise ValueError("weights must be nonnegative")
    f, v = _weighted_average(q, index.points, nb, weights)
    return f, v, nb, weights


def directional_distance(q, index: SpatialIndex, K: int, weights=None, epsilon: float = 1e-12) -> DirectionalDistance:
    w = None if weights is None else np.asarray(weights, dtype=np.float64).reshape(1, -1)
    f, v, _, _ = directional_distances(np.asarray(q, dtype=np.float64)[None, :], index, K, w, epsilon)
    return DirectionalDistance(float(f[0]), v[0])


def _resolve_selected(p1: np.ndarray, p2: np.ndarray, refs: ReferenceSet) -> str:
    m1 = cloud_digest(p1) == refs.source_digest
    m2 = cloud_digest(p2) == refs.source_digest
    if m1 and m2:
        return refs.selected
    if m1:
        return "first"
    if m2:
        return "second"
    raise ValueError("reference set was not generated from either point cloud")


class StaticSide:
    """Cached geometry of the reference-seeding cloud against a fixed ``Q``."""

    def __init__(self, cloud, refs: np.ndarray, K: int, epsilon: float, workers: int | None = None):
        self.points = as_points(cloud)
        self.refs = np.ascontiguousarray(refs, dtype=np.float64)
        self.K = int(K)
        if self.K > self.points.shape[0]:
            raise ValueError(f"K={self.K} exceeds size {self.points.shape[0]} of the reference-seeding cloud")
        self.index = SpatialIndex(self.points, workers=workers)
        self.f, self.v, self.nb, self.weights = directional_distances(self.refs, self.index, self.K, None, epsilon)
        self.wnorm = self.weights / self.weights.sum(axis=1, keepdims=True)


class MovingSide(NamedTuple):
    f: np.ndarray
    v: np.ndarray
    nb: Neighborhood
    df: np.ndarray  # f_static - f_moving, (M,)
    dv: np.ndarray  # v_static - v_moving, (M, 3)
    d: np.ndarray


def evaluate_moving(static: StaticSide, moving, workers: int | None = None) -> MovingSide:
    pts = as_points(moving)
    if static.K > pts.shape[0]:
        raise ValueError(f"K={static.K} exceeds size {pts.shape[0]} of the compared cloud")
    index = SpatialIndex(pts, workers=workers)
    f, v, nb, _ = directional_distances(static.refs, index, static.K, static.weights)
    df = static.f - f
    dv = static.v - v
    d = np.abs(df) + np.abs(dv).sum(axis=1)
    return MovingSide(f, v, nb, df, dv, d)


def confidence_scores(d: np.ndarray, beta: float) -> np.ndarray:
    return np.exp(-beta * d)


def clgd_distance(P1, P2, refs: ReferenceSet, params: ClgdParams | None = None, workers: int | None = None) -> ClgdReport:
    params = params or ClgdParams()
    p1, p2 = as_points(P1, "P1"), as_points(P2, "P2")
    which = _resolve_selected(p1, p2, refs)
    sel, oth = (p1, p2) if which == "first" else (p2, p1)
    static = StaticSide(sel, refs.points, params.K, params.epsilon, workers)
    side = evaluate_moving(static, oth, workers)
    s = confidence_scores(side.d, params.beta)
    value = float(np.sum(s * side.d) / side.d.shape[0])
    return ClgdReport(value=value, per_reference=side.d, scores=s, references=refs.points)


def clgd(P1, P2, params: ClgdParams | None = None, select: str = "first", workers: int | None = None) -> ClgdReport:
    """Generate references from one cloud and evaluate; ``symmetrize`` averages both directions."""
    params = params or ClgdParams()
    p1, p2 = as_points(P1, "P1"), as_points(P2, "P2")
    if params.symmetrize:
        r1 = generate_references(p1, p2, params.reference, label="first")
        r2 = generate_references(p2, p1, params.reference, label="second")
        a = clgd_distance(p1, p2, r1, params, workers)
        b = clgd_distance(p1, p2, r2, params, workers)
        return ClgdReport(value=0.5 * (a.value + b.value))
    if select == "first":
        refs = generate_references(p1, p2, params.reference, label="first")
    elif select == "second":
        refs = generate_references(p2, p1, params.reference, label="second")
    else:
        raise ValueError(f"select must be 'first' or 'second', got {select!r}")
    return clgd_distance(p1, p2, refs, params, workers)


def moving_gradient(static: StaticSide, side: MovingSide, moving: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Gradient of ``(1/M) sum s d`` w.r.t. the moving points, scores and neighborhoods frozen."""
    M = side.d.shape[0]
    pk = moving[side.nb.indices]                       # (M, K, 3)
    diff = pk - static.refs[:, None, :]               # p_k - q
    r = side.nb.distances
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = np.where(r[..., None] > 0, diff / r[..., None], 0.0)
    coef = (scores / M)[:, None] * static.wnorm      # (M, K)
    # d = |f_s - f_m| + |v_s - v_m|_1 ; df_m/dp_k = wn_k unit_k ; dv_m/dp_k = -wn_k I
    g = coef[..., None] * (-np.sign(side.df)[:, None, None] * unit + np.sign(side.dv)[:, None, :])
    return scatter_add(side.nb.indices, g, moving.shape[0])


def clgd_gradient(P1, P2_moving, refs: ReferenceSet, params: ClgdParams | None = None, workers: int | None = None):
    """Return ``(value, grad)`` with ``grad`` of shape ``(N2, 3)``. ``refs`` must come from ``P1``."""
    params = params or ClgdParams()
    p1, p2 = as_points(P1, "P1"), as_points(P2_moving, "P2")
    if cloud_digest(p1) != refs.source_digest:
        if cloud_digest(p2) == refs.source_digest:
            raise ValueError("gradient requires references generated from the static cloud P1")
        raise ValueError("reference set was not generated from either point cloud")
    obj = ClgdObjective(p1, refs, params, workers)
    return obj(p2)


class ClgdObjective:
    """CLGD against a fixed static cloud, reusing its neighborhoods across calls."""

    def __init__(self, static, refs: ReferenceSet, params: ClgdParams, workers: int | None = None):
        self.params = params
        self.workers = workers
        self.static = StaticSide(static, refs.points, params.K, params.epsilon, workers)

    def evaluate(self, moving) -> tuple[float, MovingSide, np.ndarray]:
        side = evaluate_moving(self.static, moving, self.workers)
        s = confidence_scores(side.d, self.params.beta)
        return float(np.sum(s * side.d) / side.d.shape[0]), side, s

    def __call__(self, moving) -> tuple[float, np.ndarray]:
        pts = as_points(moving)
        value, side, s = self.evaluate(pts)
        return value, moving_gradient(self.static, side, pts, s)
