"""Point-cloud container and exact nearest-neighbor queries."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree


class PointCloudError(ValueError):
    """Raised when a point cloud violates its invariants."""


def as_points(points, name: str = "cloud") -> np.ndarray:
    """Validate and widen ``points`` to a C-contiguous ``(N, 3)`` float64 array."""
    if isinstance(points, PointCloud):
        return points.points
    arr = np.ascontiguousarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise PointCloudError(f"{name}: expected an (N, 3) array, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise PointCloudError(f"{name}: point cloud is empty")
    if not np.isfinite(arr).all():
        raise PointCloudError(f"{name}: point cloud contains NaN or Inf coordinates")
    return arr


@dataclass(frozen=True, eq=False)
class PointCloud:
    """An ordered, non-empty set of finite 3D positions."""

    points: np.ndarray

    def __post_init__(self):
        arr = as_points(self.points).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)


class Neighborhood(NamedTuple):
    """K nearest neighbors, sorted by ascending distance with index tie-break."""

    indices: np.ndarray
    distances: np.ndarray


def default_workers() -> int:
    """Thread count for tree queries: ``CLGD_THREADS`` or all logical cores."""
    env = os.environ.get("CLGD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _row_distances(queries: np.ndarray, points: np.ndarray, idx: np.ndarray) -> np.ndarray:
    diff = queries[:, None, :] - points[idx]
    return np.sqrt(np.einsum("mkc,mkc->mk", diff, diff))


def _sort_rows(dist: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Order each row by ``(distance, index)``; rows already strictly increasing are left alone."""
    todo = np.flatnonzero((np.diff(dist, axis=1) <= 0).any(axis=1))
    if todo.size:
        d, i = dist[todo], idx[todo]
        # lexsort: last key is primary
        order = np.lexsort((i, d), axis=-1)
        dist, idx = dist.copy(), idx.copy()
        dist[todo] = np.take_along_axis(d, order, -1)
        idx[todo] = np.take_along_axis(i, order, -1)
    return idx, dist


class SpatialIndex:
    """Immutable exact KNN index over a point cloud.

    Candidate sets come from a k-d tree; distances are recomputed with a single
    formula and re-sorted on ``(distance, index)`` so that results are identical
    to an exhaustive scan, ties included.
    """

    # extra candidates fetched per query so boundary ties can be resolved
    _SLACK = 1
    _LEAFSIZE = 32

    def __init__(self, cloud, workers: int | None = None):
        self._points = as_points(cloud)
        self._points.setflags(write=False)
        self._tree = cKDTree(self._points, leafsize=self._LEAFSIZE)
        self.workers = default_workers() if workers is None else int(workers)

    @property
    def points(self) -> np.ndarray:
        return self._points

    def __len__(self) -> int:
        return self._points.shape[0]

    def _check_k(self, k: int) -> int:
        k = int(k)
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        if k > len(self):
            raise ValueError(f"k={k} exceeds cloud size {len(self)}")
        return k

    def query(self, queries, k: int) -> Neighborhood:
        """Batched KNN. ``queries`` is ``(M, 3)``; returns ``(M, k)`` arrays."""
        k = self._check_k(k)
        q = np.ascontiguousarray(queries, dtype=np.float64).reshape(-1, 3)
        m, n = q.shape[0], len(self)
        if m == 0:
            return Neighborhood(np.empty((0, k), dtype=np.int64), np.empty((0, k)))

        rows = np.arange(m)
        idx_out = np.empty((m, k), dtype=np.int64)
        dist_out = np.empty((m, k))
        kk = min(n, k + self._SLACK)
        while rows.size:
            sub = q[rows]
            _, cand = self._tree.query(sub, k=kk, workers=self.workers)
            cand = np.asarray(cand, dtype=np.int64).reshape(len(rows), kk)
            dist = _row_distances(sub, self._points, cand)
            cand, dist = _sort_rows(dist, cand)
            if kk == n:
                done = np.ones(len(rows), dtype=bool)
            else:
                # the k-th neighbor is settled only if the farthest candidate is
                # strictly (with margin for the tree's own rounding) beyond it
                kth = dist[:, k - 1]
                done = dist[:, -1] > kth * (1.0 + 1e-9) + 1e-300
            idx_out[rows[done]] = cand[done, :k]
            dist_out[rows[done]] = dist[done, :k]
            rows = rows[~done]
            kk = min(n, 2 * kk)
        return Neighborhood(idx_out, dist_out)


def scatter_add(index: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    """Sum ``(L, 3)`` rows of ``values`` into an ``(n, 3)`` array at ``index``."""
    index = index.ravel()
    values = values.reshape(-1, 3)
    return np.stack([np.bincount(index, weights=values[:, c], minlength=n) for c in range(3)], axis=1)


def build_index(cloud, workers: int | None = None) -> SpatialIndex:
    return SpatialIndex(cloud, workers=workers)


def knn(index: SpatialIndex, query, k: int) -> Neighborhood:
    """KNN for a single 3D position (shape ``(3,)``) or a batch (``(M, 3)``)."""
    q = np.asarray(query, dtype=np.float64)
    if q.ndim == 1:
        nb = index.query(q[None, :], k)
        return Neighborhood(nb.indices[0], nb.distances[0])
    return index.query(q, k)


def nearest_distance(index: SpatialIndex, query) -> np.ndarray | float:
    q = np.asarray(query, dtype=np.float64)
    if q.ndim == 1:
        return float(index.query(q[None, :], 1).distances[0, 0])
    return index.query(q.reshape(-1, 3), 1).distances[:, 0]


def nearest_other_distance(cloud) -> np.ndarray:
    """Distance from every point to its nearest *other* point of the same cloud."""
    pts = as_points(cloud)
    if pts.shape[0] < 2:
        raise PointCloudError("nearest-other distance needs at least 2 points")
    nb = SpatialIndex(pts).query(pts, 2)
    own = np.arange(pts.shape[0])
    # with duplicates the self point may come second; take whichever is not self
    first_is_self = nb.indices[:, 0] == own
    return np.where(first_is_self, nb.distances[:, 1], nb.distances[:, 0])
